#include "fptb/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fptb/errors.hpp"
#include "fptb/numerics/normal.hpp"

namespace fptb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log(kappa1/2 + sqrt(kappa1^2/4 + kappa2 e^{-4 delta^2 / t})) and the inner root.
struct DanielsInner {
    double log_arg;
    double root;
    double e;  // exp(-4 delta^2 / t)
};

DanielsInner daniels_inner(const DanielsParams& p, double t) {
    const double e = std::exp(-4.0 * p.delta * p.delta / t);
    const double root = std::sqrt(0.25 * p.kappa1 * p.kappa1 + p.kappa2 * e);
    return {std::log(0.5 * p.kappa1 + root), root, e};
}

}  // namespace

void DanielsParams::validate() const {
    if (!std::isfinite(delta) || delta == 0.0) throw DomainError("Daniels delta must be finite and non-zero");
    if (!(kappa1 > 0.0) || !std::isfinite(kappa1)) throw DomainError("Daniels kappa1 must be positive");
    if (!std::isfinite(kappa2)) throw DomainError("Daniels kappa2 must be finite");
    if (!(kappa1 * kappa1 + 4.0 * kappa2 > 0.0)) throw DomainError("Daniels parameters need kappa1^2 + 4 kappa2 > 0");
}

double daniels_boundary(const DanielsParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw DomainError("Daniels boundary needs t >= 0");
    if (t == 0.0) return p.delta;
    return p.delta - t / (2.0 * p.delta) * daniels_inner(p, t).log_arg;
}

double daniels_boundary_derivative(const DanielsParams& p, double t) {
    p.validate();
    if (!(t >= 0.0)) throw DomainError("Daniels boundary needs t >= 0");
    if (t == 0.0) return -std::log(p.kappa1) / (2.0 * p.delta);
    const DanielsInner in = daniels_inner(p, t);
    // d/dt of log(kappa1/2 + root) = (kappa2 e 4 delta^2 / t^2) / (2 root (kappa1/2 + root)).
    const double d2 = 4.0 * p.delta * p.delta;
    const double dlog = p.kappa2 * in.e * d2 / (t * t) / (2.0 * in.root * (0.5 * p.kappa1 + in.root));
    return -(in.log_arg + t * dlog) / (2.0 * p.delta);
}

Boundary daniels(const DanielsParams& p, int grid_n) {
    p.validate();
    return Boundary::certified([p](double t) { return daniels_boundary(p, t); }, Side::Upper,
                               [p](double t) { return daniels_boundary_derivative(p, t); }, grid_n);
}

double daniels_log_fpt_density(const DanielsParams& p, double x, double t) {
    p.validate();
    if (x != 0.0) throw InapplicableError("Daniels density is defined for Brownian motion started at 0");
    if (!(t > 0.0)) throw DomainError("density needs t > 0");
    const double g = daniels_boundary(p, t);
    const double c1 = p.delta * p.kappa1;
    const double c2 = 2.0 * p.delta * p.kappa2;
    const double e1 = -(g - 2.0 * p.delta) * (g - 2.0 * p.delta) / (2.0 * t);
    const double e2 = -(g - 4.0 * p.delta) * (g - 4.0 * p.delta) / (2.0 * t);
    const double top = std::max(e1, e2);
    const double s = c1 * std::exp(e1 - top) + c2 * std::exp(e2 - top);
    if (!(s > 0.0)) return kNegInf;
    return std::log(s) + top - kLogSqrt2Pi - 1.5 * std::log(t);
}

double daniels_fpt_density(const DanielsParams& p, double x, double t) {
    return std::exp(daniels_log_fpt_density(p, x, t));
}

void OUParams::validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("OU theta must be positive");
    if (!std::isfinite(mu) || !std::isfinite(A) || !std::isfinite(B) || !std::isfinite(x)) {
        throw DomainError("OU parameters must be finite");
    }
}

double ou_log_transition_density(const OUParams& p, double t, double x, double z) {
    p.validate();
    if (!(t > 0.0)) throw DomainError("transition density needs t > 0");
    // Mean mu + (x - mu) e^{-theta t}, variance (1 - e^{-2 theta t}) / (2 theta).
    const double var = -std::expm1(-2.0 * p.theta * t) / (2.0 * p.theta);
    const double m = p.mu + (x - p.mu) * std::exp(-p.theta * t);
    const double d = z - m;
    return -0.5 * d * d / var - 0.5 * std::log(var) - kLogSqrt2Pi;
}

double ou_transition_density(const OUParams& p, double t, double x, double z) {
    return std::exp(ou_log_transition_density(p, t, x, z));
}

double ou_hyperbolic_boundary(const OUParams& p, double t) {
    return p.mu + p.A * std::exp(-p.theta * t) + p.B * std::exp(p.theta * t);
}

double ou_hyperbolic_boundary_derivative(const OUParams& p, double t) {
    return p.theta * (-p.A * std::exp(-p.theta * t) + p.B * std::exp(p.theta * t));
}

Boundary ou_hyperbolic(const OUParams& p, int grid_n) {
    p.validate();
    return Boundary::certified([p](double t) { return ou_hyperbolic_boundary(p, t); }, Side::Upper,
                               [p](double t) { return ou_hyperbolic_boundary_derivative(p, t); }, grid_n);
}

double ou_hyperbolic_log_fpt_density(const OUParams& p, double t) {
    p.validate();
    if (!(p.x < p.mu + p.A + p.B)) throw DomainError("OU start must lie below mu + A + B");
    if (!(t > 0.0)) throw DomainError("density needs t > 0");
    const double gap = std::abs(p.A + p.B - p.x + p.mu);
    if (gap == 0.0) return kNegInf;
    const double sh = 2.0 * std::sinh(p.theta * t);
    return std::log(2.0 * p.theta * gap / sh) + ou_log_transition_density(p, t, p.x, ou_hyperbolic_boundary(p, t));
}

double ou_hyperbolic_fpt_density(const OUParams& p, double t) { return std::exp(ou_hyperbolic_log_fpt_density(p, t)); }

double bm_linear_log_fpt_density(double a, double b, double c, double x, double t) {
    if (!(a > x)) throw DomainError("linear boundary must start above x");
    if (!(t > 0.0)) throw DomainError("density needs t > 0");
    const double z = (a + b * t - x - c * t) / std::sqrt(t);
    return std::log(a - x) - 1.5 * std::log(t) - 0.5 * z * z - kLogSqrt2Pi;
}

double bm_linear_fpt_density(double a, double b, double c, double x, double t) {
    return std::exp(bm_linear_log_fpt_density(a, b, c, x, t));
}

double bm_linear_total_crossing(double a, double b, double c, double x) {
    if (!(a > x)) throw DomainError("linear boundary must start above x");
    const double rel = b - c;
    if (rel <= 0.0) return 1.0;
    return std::exp(-2.0 * (a - x) * rel);
}

double bm_linear_crossing_probability(double a, double b, double c, double x, double horizon) {
    if (!(a > x)) throw DomainError("linear boundary must start above x");
    if (!(horizon > 0.0)) return 0.0;
    // Level a - x for a Brownian motion with drift m = c - b.
    const double level = a - x;
    const double m = c - b;
    const double st = std::sqrt(horizon);
    const double first = numerics::normal_cdf((-level + m * horizon) / st);
    const double log_second = 2.0 * m * level;
    const double second_cdf = numerics::normal_cdf((-level - m * horizon) / st);
    const double second = second_cdf > 0.0 ? std::exp(log_second + std::log(second_cdf)) : 0.0;
    return std::min(1.0, first + second);
}

double brownian_bridge_no_cross(double x, double z, double t, double intercept, double slope) {
    if (!(t > 0.0)) throw DomainError("bridge length must be positive");
    const double b1 = intercept - x;
    const double b2 = (intercept + slope * t - z) / t;
    if (b1 <= 0.0 || b2 <= 0.0) return 0.0;
    const double v = -std::expm1(-2.0 * b1 * b2);
    return std::clamp(v, 0.0, 1.0);
}

double bm_band_survival(double a, double horizon) {
    if (!(a > 0.0)) throw DomainError("band half-width must be positive");
    if (!(horizon > 0.0)) return 1.0;
    // sum_k (-1)^k [Phi((2k+1)a / sqrt T) - Phi((2k-1)a / sqrt T)] over all integers k.
    const double st = std::sqrt(horizon);
    double total = 0.0;
    for (int k = -200; k <= 200; ++k) {
        const double hi = (4.0 * k + 1.0) * a / st;
        const double lo = (4.0 * k - 1.0) * a / st;
        total += numerics::normal_cdf(hi) - numerics::normal_cdf(lo);
        const double hi2 = (4.0 * k + 3.0) * a / st;
        const double lo2 = (4.0 * k + 1.0) * a / st;
        total -= numerics::normal_cdf(hi2) - numerics::normal_cdf(lo2);
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace fptb
