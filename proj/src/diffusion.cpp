#include "fptb/diffusion.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fptb/errors.hpp"
#include "fptb/numerics/bessel.hpp"
#include "fptb/numerics/minimize.hpp"
#include "fptb/numerics/normal.hpp"
#include "fptb/numerics/quadrature.hpp"

namespace fptb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double central_difference(const RealFn& f, double y, double lower_endpoint) {
    double h = 1e-6 * std::max(1.0, std::abs(y));
    if (std::isfinite(lower_endpoint)) h = std::min(h, 0.5 * (y - lower_endpoint));
    return (f(y + h) - f(y - h)) / (2.0 * h);
}

// Smallest positive y probed on interval B when searching towards the origin.
constexpr double kHalfLineFloor = 1e-150;

}  // namespace

std::string to_string(DiffusionInterval interval) {
    return interval == DiffusionInterval::A ? "A" : "B";
}

// ---------------------------------------------------------------------------
// DiffusionModel

DiffusionModel::DiffusionModel(RealFn mu, RealFn mu_prime, DiffusionInterval interval, double x)
    : mu_(std::move(mu)), mu_prime_(std::move(mu_prime)), interval_(interval), x_(x) {
    if (!mu_) throw InvalidModelError("diffusion model requires a drift function");
    if (!std::isfinite(x_)) throw InvalidModelError("start point must be finite");
    if (!contains(x_)) throw InvalidModelError("start point must lie strictly inside the diffusion interval");
    if (!mu_prime_) {
        const double lower = lower_endpoint();
        mu_prime_ = [f = mu_, lower](double y) { return central_difference(f, y, lower); };
    }
}

DiffusionModel DiffusionModel::brownian(double x, double drift) {
    return DiffusionModel([drift](double) { return drift; }, [](double) { return 0.0; },
                          DiffusionInterval::A, x);
}

DiffusionModel DiffusionModel::ornstein_uhlenbeck(double theta, double mean, double x) {
    if (!(theta > 0.0)) throw InvalidModelError("Ornstein-Uhlenbeck requires theta > 0");
    return DiffusionModel([theta, mean](double y) { return -theta * (y - mean); },
                          [theta](double) { return -theta; }, DiffusionInterval::A, x);
}

DiffusionModel DiffusionModel::bessel(int d, double x) {
    if (d < 1) throw InvalidModelError("Bessel dimension must be >= 1");
    const double c = static_cast<double>(d - 1);
    // Same floating-point expressions as the Bessel reference terms, so that
    // model and reference cancel exactly when the dimensions agree.
    return DiffusionModel([c](double y) { return c / (2.0 * y); },
                          [c](double y) { return -c / (2.0 * y * y); }, DiffusionInterval::B, x);
}

double DiffusionModel::lower_endpoint() const noexcept {
    return interval_ == DiffusionInterval::A ? -kInf : 0.0;
}

bool DiffusionModel::contains(double y) const noexcept {
    return interval_ == DiffusionInterval::A ? std::isfinite(y) : (y > 0.0 && std::isfinite(y));
}

DiffusionModel DiffusionModel::with_start(double x) const {
    return DiffusionModel(mu_, mu_prime_, interval_, x);
}

DiffusionModel DiffusionModel::reflected() const {
    if (interval_ != DiffusionInterval::A) {
        throw InapplicableError("reflection is only available on the whole line (interval A)");
    }
    return DiffusionModel([f = mu_](double y) { return -f(-y); },
                          [fp = mu_prime_](double y) { return fp(-y); }, interval_, -x_);
}

// ---------------------------------------------------------------------------
// Unit-diffusion transform

namespace {

struct RawFunctions {
    RealFn nu, sigma, nu_prime, sigma_prime, sigma_second;
};

RawFunctions complete_derivatives(const RawDiffusion& raw) {
    const double lower = raw.interval == DiffusionInterval::A ? -kInf : 0.0;
    RawFunctions out{raw.nu, raw.sigma, raw.nu_prime, raw.sigma_prime, raw.sigma_second};
    if (!out.nu_prime) out.nu_prime = [f = raw.nu, lower](double u) { return central_difference(f, u, lower); };
    if (!out.sigma_prime) {
        out.sigma_prime = [f = raw.sigma, lower](double u) { return central_difference(f, u, lower); };
    }
    if (!out.sigma_second) {
        out.sigma_second = [fp = out.sigma_prime, lower](double u) { return central_difference(fp, u, lower); };
    }
    return out;
}

double checked_sigma(const RealFn& sigma, double u) {
    const double s = sigma(u);
    if (!(s > 0.0) || !std::isfinite(s)) {
        throw InvalidModelError("sigma must be positive inside the diffusion interval (sigma(" +
                                std::to_string(u) + ") = " + std::to_string(s) + ")");
    }
    return s;
}

bool raw_contains(const RawDiffusion& raw, double u) {
    return raw.interval == DiffusionInterval::A ? std::isfinite(u) : (u > 0.0 && std::isfinite(u));
}

// Inverts a strictly increasing F with derivative 1/sigma by bracketing
// followed by safeguarded Newton iterations.
double invert_monotone(const RealFn& F, const RealFn& sigma, double target, double start,
                       bool half_line) {
    double lo = start;
    double hi = start;
    double f_start = F(start);
    if (f_start == target) return start;
    double step = std::max(1.0, std::abs(start));
    if (f_start < target) {
        for (int i = 0; i < 200 && F(hi) < target; ++i) {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
    } else {
        for (int i = 0; i < 2000 && F(lo) > target; ++i) {
            hi = lo;
            if (half_line) {
                lo *= 0.5;
            } else {
                lo -= step;
                step *= 2.0;
            }
        }
    }
    if (!(F(lo) <= target && F(hi) >= target)) {
        throw DomainError("inverse transform: target lies outside the image of F");
    }
    double u = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double residual = F(u) - target;
        if (std::abs(residual) <= 1e-14 * std::max(1.0, std::abs(target))) return u;
        if (residual > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        double next = u - residual * checked_sigma(sigma, u);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == u) return u;
        u = next;
    }
    return u;
}

}  // namespace

LampertiResult lamperti_transform(const RawDiffusion& raw, double x0_raw) {
    if (!raw.nu || !raw.sigma) throw InvalidModelError("raw diffusion requires nu and sigma");
    if (!raw_contains(raw, raw.y0)) throw InvalidModelError("transform base point must lie inside the interval");
    if (!raw_contains(raw, x0_raw)) throw InvalidModelError("start point must lie inside the interval");

    const RawFunctions fns = complete_derivatives(raw);
    const bool half_line = raw.interval == DiffusionInterval::B;

    // Probe sigma around the base and start points before committing.
    for (double base : {raw.y0, x0_raw}) {
        for (int i = -8; i <= 8; ++i) {
            const double u = half_line ? base * std::pow(2.0, i) : base + i * 0.25 * std::max(1.0, std::abs(base));
            checked_sigma(fns.sigma, u);
        }
    }

    RealFn base_F = raw.transform;
    if (!base_F) {
        base_F = [sigma = fns.sigma, y0 = raw.y0](double u) {
            return numerics::integrate([&sigma](double v) { return 1.0 / checked_sigma(sigma, v); }, y0, u)
                .value;
        };
    }

    // On a half line the image keeps a finite endpoint only when 1/sigma is
    // integrable at the origin; shift it to 0 in that case.
    DiffusionInterval image = DiffusionInterval::A;
    double shift = 0.0;
    if (half_line) {
        if (raw.transform) {
            const double at_origin = raw.transform(0.0);
            if (std::isfinite(at_origin)) {
                image = DiffusionInterval::B;
                shift = at_origin;
            }
        } else {
            try {
                const auto tail = numerics::integrate(
                    [sigma = fns.sigma](double v) { return 1.0 / checked_sigma(sigma, v); }, 0.0, raw.y0,
                    1e-10, 2000);
                image = DiffusionInterval::B;
                shift = -tail.value;
            } catch (const ConvergenceError&) {
                image = DiffusionInterval::A;
            }
        }
    }

    RealFn F = [base_F, shift](double u) { return base_F(u) - shift; };
    RealFn F_inv;
    if (raw.inverse_transform) {
        F_inv = [inv = raw.inverse_transform, shift](double y) { return inv(y + shift); };
    } else {
        F_inv = [F, sigma = fns.sigma, y0 = raw.y0, half_line](double y) {
            return invert_monotone(F, sigma, y, y0, half_line);
        };
    }

    auto h = [fns](double u) {
        const double s = checked_sigma(fns.sigma, u);
        return fns.nu(u) / s - 0.5 * fns.sigma_prime(u);
    };
    auto h_prime = [fns](double u) {
        const double s = checked_sigma(fns.sigma, u);
        return (fns.nu_prime(u) * s - fns.nu(u) * fns.sigma_prime(u)) / (s * s) - 0.5 * fns.sigma_second(u);
    };
    RealFn mu = [h, F_inv](double y) { return h(F_inv(y)); };
    RealFn mu_prime = [h_prime, F_inv, sigma = fns.sigma](double y) {
        const double u = F_inv(y);
        return h_prime(u) * sigma(u);
    };

    DiffusionModel model(std::move(mu), std::move(mu_prime), image, F(x0_raw));
    return {std::move(model), std::move(F), std::move(F_inv)};
}

// ---------------------------------------------------------------------------
// Reference processes

ReferenceProcess ReferenceProcess::bessel(int d) {
    if (d < 3) throw InvalidModelError("Bessel reference requires integer dimension d >= 3");
    return ReferenceProcess(Kind::Bessel, d);
}

ReferenceProcess ReferenceProcess::for_model(const DiffusionModel& model, int d) {
    return model.interval() == DiffusionInterval::A ? brownian() : bessel(d);
}

std::string ReferenceProcess::describe() const {
    return kind_ == Kind::BrownianMotion ? "bm" : "bessel(" + std::to_string(d_) + ")";
}

void check_compatible(const DiffusionModel& model, const ReferenceProcess& ref) {
    const bool bm = ref.kind() == ReferenceProcess::Kind::BrownianMotion;
    if (bm != (model.interval() == DiffusionInterval::A)) {
        throw InvalidModelError(bm ? "Brownian reference requires a whole-line (A) diffusion"
                                   : "Bessel reference requires a half-line (B) diffusion");
    }
}

double log_reference_density(const ReferenceProcess& ref, double t, double y, double z) {
    if (!(t > 0.0)) throw DomainError("reference density requires t > 0");
    if (ref.kind() == ReferenceProcess::Kind::BrownianMotion) {
        const double d = z - y;
        return -0.5 * d * d / t - 0.5 * std::log(2.0 * std::numbers::pi * t);
    }
    if (y < 0.0 || z < 0.0) throw DomainError("Bessel density requires y, z >= 0");
    if (z == 0.0) return -kInf;
    // z (z/y)^eta t^-1 exp(-(y^2 + z^2) / 2t) I_eta(yz/t)
    //   = z (z^2/t)^eta t^-1 exp(-(y - z)^2 / 2t) [exp(-w) I_eta(w) / w^eta],  w = yz/t
    const double eta = ref.eta();
    const double w = y * z / t;
    const double d = y - z;
    return std::log(z) + eta * (2.0 * std::log(z) - std::log(t)) - std::log(t) - 0.5 * d * d / t +
           std::log(numerics::bessel_i_over_power_scaled(eta, w));
}

double reference_density(const ReferenceProcess& ref, double t, double y, double z) {
    return std::exp(log_reference_density(ref, t, y, z));
}

// ---------------------------------------------------------------------------
// G and the M-type functionals

double g_integrand(const DiffusionModel& model, const ReferenceProcess& ref, double z) {
    if (ref.kind() == ReferenceProcess::Kind::BrownianMotion) return model.mu(z);
    return model.mu(z) - static_cast<double>(ref.dimension() - 1) / (2.0 * z);
}

double G_value(const DiffusionModel& model, const ReferenceProcess& ref, double y, double y0) {
    check_compatible(model, ref);
    if (!model.contains(y) || !model.contains(y0)) {
        throw DomainError("G_value: points must lie strictly inside the diffusion interval");
    }
    if (y == y0) return 0.0;
    try {
        return numerics::integrate([&](double z) { return g_integrand(model, ref, z); }, y0, y).value;
    } catch (const ConvergenceError& e) {
        throw DivergenceError(std::string("G_value: integrand not integrable on the range: ") + e.what());
    }
}

double drift_functional(const DiffusionModel& model, const ReferenceProcess& ref, double y) {
    if (ref.kind() == ReferenceProcess::Kind::BrownianMotion) {
        const double m = model.mu(y);
        return model.mu_prime(y) + m * m;
    }
    // mu' - (d-1)(d-3)/(4y^2) + mu^2 rewritten through nu = mu - (d-1)/(2y) as
    // nu' + nu^2 + (d-1) nu / y, which avoids cancelling O(y^-2) terms near 0.
    const double c = static_cast<double>(ref.dimension() - 1);
    const double nu = model.mu(y) - c / (2.0 * y);
    const double nu_prime = model.mu_prime(y) + c / (2.0 * y * y);
    return nu_prime + nu * nu + c * nu / y;
}

namespace {

numerics::SemiInfiniteOptions window_options() { return {}; }

Functional to_functional(const numerics::SemiInfiniteExtremum& e) { return {e.value, e.divergent, true}; }

Functional half_line_infimum(const std::function<double(double)>& f, double gbar) {
    auto options = window_options();
    options.limit = std::log(kHalfLineFloor);
    const auto inf = numerics::infimum_semi_infinite([&f](double s) { return f(std::exp(s)); }, std::log(gbar),
                                                     numerics::SearchDirection::Down, options);
    return to_functional(inf);
}

}  // namespace

Functional functional_M(const DiffusionModel& model, const ReferenceProcess& ref, double gbar) {
    check_compatible(model, ref);
    if (!model.contains(gbar)) throw DomainError("functional_M: gbar must lie inside the diffusion interval");
    auto f = [&](double y) { return drift_functional(model, ref, y); };
    if (model.interval() == DiffusionInterval::B) return half_line_infimum(f, gbar);
    return to_functional(numerics::infimum_semi_infinite(f, gbar, numerics::SearchDirection::Down, window_options()));
}

Functional functional_M_star(const DiffusionModel& model, double gbar) {
    if (model.interval() != DiffusionInterval::A) return {0.0, false, false};
    auto ref = ReferenceProcess::brownian();
    auto f = [&](double y) { return drift_functional(model, ref, y); };
    return to_functional(numerics::supremum_semi_infinite(f, gbar, numerics::SearchDirection::Down, window_options()));
}

Functional functional_L(const DiffusionModel& model, double gunder) {
    if (model.interval() != DiffusionInterval::A) return {0.0, false, false};
    auto ref = ReferenceProcess::brownian();
    auto f = [&](double y) { return drift_functional(model, ref, y); };
    return to_functional(numerics::infimum_semi_infinite(f, gunder, numerics::SearchDirection::Up, window_options()));
}

Functional functional_L_star(const DiffusionModel& model, double gunder) {
    if (model.interval() != DiffusionInterval::A) return {0.0, false, false};
    auto ref = ReferenceProcess::brownian();
    auto f = [&](double y) { return drift_functional(model, ref, y); };
    return to_functional(numerics::supremum_semi_infinite(f, gunder, numerics::SearchDirection::Up, window_options()));
}

FunctionalValues m_functionals(const DiffusionModel& model, const ReferenceProcess& ref, double gbar,
                               double gunder) {
    FunctionalValues out;
    out.M = functional_M(model, ref, gbar);
    out.M_star = functional_M_star(model, gbar);
    out.L = functional_L(model, gunder);
    out.L_star = functional_L_star(model, gunder);
    return out;
}

}  // namespace fptb
