#pragma once

#include <functional>
#include <optional>
#include <string>

namespace fptb {

using RealFn = std::function<double(double)>;

/// Diffusion interval of the unit-diffusion process X_t.
enum class DiffusionInterval {
    A,  // the whole real line
    B,  // the half line [0, inf)
};

std::string to_string(DiffusionInterval interval);

/// dU = nu(U) dt + sigma(U) dW before the unit-diffusion transform.
/// Derivatives left empty are replaced by central finite differences.
/// `transform`/`inverse_transform` may carry closed forms of F and F^{-1};
/// otherwise F is computed by quadrature and inverted numerically.
struct RawDiffusion {
    RealFn nu;
    RealFn sigma;
    RealFn nu_prime;
    RealFn sigma_prime;
    RealFn sigma_second;
    DiffusionInterval interval = DiffusionInterval::A;
    double y0 = 0.0;
    RealFn transform;
    RealFn inverse_transform;
};

/// dX = mu(X) dt + dW, X_0 = x, on interval A or B. Immutable.
class DiffusionModel {
public:
    /// An empty mu_prime falls back to central differences with step
    /// 1e-6 * max(1, |y|).
    DiffusionModel(RealFn mu, RealFn mu_prime, DiffusionInterval interval, double x);

    static DiffusionModel brownian(double x, double drift = 0.0);
    static DiffusionModel ornstein_uhlenbeck(double theta, double mean, double x);
    /// Bessel process of dimension d: drift (d - 1) / (2y) on [0, inf).
    static DiffusionModel bessel(int d, double x);

    double mu(double y) const { return mu_(y); }
    double mu_prime(double y) const { return mu_prime_(y); }
    const RealFn& mu_fn() const noexcept { return mu_; }
    const RealFn& mu_prime_fn() const noexcept { return mu_prime_; }

    DiffusionInterval interval() const noexcept { return interval_; }
    double x() const noexcept { return x_; }
    /// -inf for interval A, 0 for interval B.
    double lower_endpoint() const noexcept;
    /// Strictly inside the diffusion interval.
    bool contains(double y) const noexcept;

    DiffusionModel with_start(double x) const;

    /// Model of -X_t: drift y -> -mu(-y), start -x. Interval A only.
    DiffusionModel reflected() const;

private:
    RealFn mu_;
    RealFn mu_prime_;
    DiffusionInterval interval_;
    double x_;
};

struct LampertiResult {
    DiffusionModel model;
    RealFn F;
    RealFn F_inv;
};

/// Transforms dU = nu dt + sigma dW into unit diffusion through
/// F(y) = int_{y0}^y du / sigma(u), X = F(U), with drift
/// mu = (nu / sigma - sigma' / 2) o F^{-1}. For a half-line U whose F(0+) is
/// finite, F is shifted so that 0 maps to 0 and the image is interval B;
/// otherwise the image is the whole line.
LampertiResult lamperti_transform(const RawDiffusion& raw, double x0_raw);

/// Reference process used by the density bounds: Brownian motion for
/// interval A, a Bessel process of integer dimension d >= 3 for interval B.
class ReferenceProcess {
public:
    enum class Kind { BrownianMotion, Bessel };

    static ReferenceProcess brownian() { return ReferenceProcess(Kind::BrownianMotion, 0); }
    static ReferenceProcess bessel(int d);
    /// Brownian motion for A; Bessel(d) for B.
    static ReferenceProcess for_model(const DiffusionModel& model, int d = 3);

    Kind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return d_; }
    /// d / 2 - 1 for Bessel.
    double eta() const noexcept { return 0.5 * d_ - 1.0; }

    std::string describe() const;

private:
    ReferenceProcess(Kind kind, int d) : kind_(kind), d_(d) {}
    Kind kind_;
    int d_;
};

/// Throws InvalidModelError unless BM pairs with interval A and Bessel with B.
void check_compatible(const DiffusionModel& model, const ReferenceProcess& ref);

/// Transition density q(t, y, z) of the reference process.
double reference_density(const ReferenceProcess& ref, double t, double y, double z);
double log_reference_density(const ReferenceProcess& ref, double t, double y, double z);

/// Integrand of G: mu (interval A) or mu(z) - (d - 1) / (2z) (interval B).
double g_integrand(const DiffusionModel& model, const ReferenceProcess& ref, double z);

/// G(y) - G(y0) by quadrature (tol 1e-10). Only differences of G are
/// observable, so the base point is a free parameter.
double G_value(const DiffusionModel& model, const ReferenceProcess& ref, double y, double y0);

/// The quantity whose extrema over y give M, M*, L, L*:
/// mu' + mu^2 on A; mu' - (d - 1)(d - 3) / (4y^2) + mu^2 on B.
double drift_functional(const DiffusionModel& model, const ReferenceProcess& ref, double y);

struct Functional {
    double value = 0.0;
    bool divergent = false;
    /// False where the functional is not defined (interval B lower bounds).
    bool defined = true;
};

struct FunctionalValues {
    Functional M;       // inf over y <= gbar (y > 0 on B)
    Functional M_star;  // sup over y <= gbar, interval A only
    Functional L;       // inf over y >= gunder, interval A only
    Functional L_star;  // sup over y >= gunder, interval A only
};

Functional functional_M(const DiffusionModel& model, const ReferenceProcess& ref, double gbar);
Functional functional_M_star(const DiffusionModel& model, double gbar);
Functional functional_L(const DiffusionModel& model, double gunder);
Functional functional_L_star(const DiffusionModel& model, double gunder);

FunctionalValues m_functionals(const DiffusionModel& model, const ReferenceProcess& ref,
                               double gbar, double gunder);

}  // namespace fptb
