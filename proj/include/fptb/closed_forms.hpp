#pragma once

#include "fptb/boundary.hpp"

namespace fptb {

/// g(t) = delta - t/(2 delta) log(kappa1/2 + sqrt(kappa1^2/4 + kappa2 exp(-4 delta^2 / t))).
struct DanielsParams {
    double delta = 0.5;
    double kappa1 = 0.5;
    double kappa2 = 0.5;

    void validate() const;
};

double daniels_boundary(const DanielsParams& p, double t);
double daniels_boundary_derivative(const DanielsParams& p, double t);
/// Upper boundary with Lipschitz constants from the analytic derivative.
Boundary daniels(const DanielsParams& p, int grid_n = kDefaultCertificationGrid);

/// Density of the first passage of standard Brownian motion started at 0.
double daniels_fpt_density(const DanielsParams& p, double x, double t);
double daniels_log_fpt_density(const DanielsParams& p, double x, double t);

/// dS = -theta (S - mu) dt + dW started at x, boundary mu + A e^{-theta t} + B e^{theta t}.
struct OUParams {
    double theta = 0.5;
    double mu = 2.0;
    double A = 1.0;
    double B = -1.0;
    double x = 1.0;

    void validate() const;
};

double ou_transition_density(const OUParams& p, double t, double x, double z);
double ou_log_transition_density(const OUParams& p, double t, double x, double z);
double ou_hyperbolic_boundary(const OUParams& p, double t);
double ou_hyperbolic_boundary_derivative(const OUParams& p, double t);
Boundary ou_hyperbolic(const OUParams& p, int grid_n = kDefaultCertificationGrid);
double ou_hyperbolic_fpt_density(const OUParams& p, double t);
double ou_hyperbolic_log_fpt_density(const OUParams& p, double t);

/// Density of the first passage of x + c t + W_t through a + b t.
double bm_linear_fpt_density(double a, double b, double c, double x, double t);
double bm_linear_log_fpt_density(double a, double b, double c, double x, double t);
/// Total probability of ever crossing; P(tau < infinity).
double bm_linear_total_crossing(double a, double b, double c, double x);
/// P(tau <= T) for the same setting.
double bm_linear_crossing_probability(double a, double b, double c, double x, double horizon);

/// Probability that a Brownian bridge from x at time 0 to z at time t stays
/// below the line intercept + slope * s. Zero if an endpoint is on or above
/// the line.
double brownian_bridge_no_cross(double x, double z, double t, double intercept, double slope);

/// P(sup_{s <= T} |W_s| < a) for standard Brownian motion, via the
/// alternating image series.
double bm_band_survival(double a, double horizon);

}  // namespace fptb
