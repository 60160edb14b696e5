#include "fptb/crossing_error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fptb/errors.hpp"
#include "fptb/numerics/minimize.hpp"

namespace fptb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2OverPi = 0.79788456080286535588;
constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfLineFloor = 1e-150;
constexpr int kSeparationGrid = 4096;
constexpr int kDistanceGrid = 1 << 16;

struct BranchData {
    double shift = 0.0;
    DriftEnvelope upper_env;
    std::vector<BoundReport> upper_curve;
    bool two_sided = false;
    DriftEnvelope lower_env;
    std::vector<BoundReport> lower_curve;
};

bool upper_usable(const BranchData& b) { return b.upper_env.lower_finite; }
bool lower_usable(const BranchData& b) { return b.two_sided && b.lower_env.upper_finite; }

double branch_total(const BranchData& b, double eps, double t0, bool use_upper, bool use_lower, double* d_up = nullptr,
                    double* d_lo = nullptr, double* b_sup = nullptr, double* c_sup = nullptr) {
    double total = 0.0;
    if (use_upper) {
        const double s = sup_bound_over_tail(b.upper_curve, t0);
        const double d = d_eps_formula(eps, t0, s, b.upper_env.K_star);
        if (d_up) *d_up = d;
        if (b_sup) *b_sup = s;
        total += d;
    }
    if (use_lower) {
        const double s = sup_bound_over_tail(b.lower_curve, t0);
        const double d = d_eps_formula(eps, t0, s, b.lower_env.K_hat);
        if (d_lo) *d_lo = d;
        if (c_sup) *c_sup = s;
        total += d;
    }
    return total;
}

void require_separated(const Boundary& upper, const Boundary& lower) {
    for (int i = 0; i <= kSeparationGrid; ++i) {
        const double t = static_cast<double>(i) / kSeparationGrid;
        if (!(upper(t) > lower(t))) {
            std::ostringstream os;
            os << "upper boundary must stay above the lower boundary; they meet near t = " << t;
            throw InapplicableError(os.str());
        }
    }
}

BranchData build_branch(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g_plus,
                        const std::optional<Boundary>& g_minus, double eps, double shift, double step) {
    BranchData b;
    b.shift = shift;
    const auto grid = default_time_grid(0.0, step);
    const Boundary gp = shift == 0.0 ? g_plus : g_plus.shifted(-shift);
    try {
        check_pairing(model, gp);
    } catch (const InvalidModelError& e) {
        throw InapplicableError(std::string("shifted upper boundary is not admissible: ") + e.what());
    }
    b.upper_env = drift_envelope(model, gp, eps);
    if (b.upper_env.lower_finite) b.upper_curve = bound_curve(model, ref, gp, grid);
    if (g_minus) {
        b.two_sided = true;
        const Boundary gm = shift == 0.0 ? *g_minus : g_minus->shifted(shift);
        try {
            check_pairing(model, gm);
        } catch (const InvalidModelError& e) {
            throw InapplicableError(std::string("shifted lower boundary is not admissible: ") + e.what());
        }
        if (shift != 0.0) require_separated(gp, gm);
        b.lower_env = drift_envelope(model, gm, eps);
        if (b.lower_env.upper_finite) b.lower_curve = bound_curve(model, ref, gm, grid);
    }
    return b;
}

BranchDetail detail_at(const BranchData& b, double eps, double t0, bool use_upper, bool use_lower) {
    BranchDetail d;
    d.shift = b.shift;
    d.upper_envelope = b.upper_env;
    double d_up = 0.0, d_lo = 0.0, bs = 0.0, cs = 0.0;
    d.total = branch_total(b, eps, t0, use_upper, use_lower, &d_up, &d_lo, &bs, &cs);
    if (use_upper) {
        d.B_sup = bs;
        d.D_eps = d_up;
    }
    if (b.two_sided) d.lower_envelope = b.lower_env;
    if (use_lower) {
        d.C_sup = cs;
        d.D_eps_minus = d_lo;
    }
    return d;
}

double measured_distance(const Boundary& g, const Boundary& f) {
    bool identical = true;
    for (int i = 0; i <= kDistanceGrid && identical; ++i) {
        const double t = static_cast<double>(i) / kDistanceGrid;
        identical = g(t) == f(t);
    }
    return identical ? 0.0 : certified_distance(g, f, kDistanceGrid);
}

}  // namespace

std::string to_string(CertificateSide side) { return side == CertificateSide::TwoSided ? "two-sided" : "one-sided-upper"; }

std::string to_string(MaxRuleBranch branch) { return branch == MaxRuleBranch::AtG ? "at_g" : "at_g_minus_eps"; }

DriftEnvelope drift_envelope(const DiffusionModel& model, const Boundary& g, double eps) {
    if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
    DriftEnvelope env;
    const double g0 = g(0.0);
    // signed constants never shrink the window below g(0) +- eps
    const double top = g0 + std::max(0.0, g.k_plus()) + eps;
    const double bottom = g0 - std::max(0.0, g.k_minus()) - eps;
    const auto& mu = model.mu_fn();
    if (model.interval() == DiffusionInterval::A) {
        const auto lo = numerics::infimum_semi_infinite(mu, top, numerics::SearchDirection::Down);
        env.mu_lower = lo.value;
        env.lower_finite = !lo.divergent && std::isfinite(lo.value);
        const auto hi = numerics::supremum_semi_infinite(mu, bottom, numerics::SearchDirection::Up);
        env.mu_upper = hi.value;
        env.upper_finite = !hi.divergent && std::isfinite(hi.value);
    } else {
        if (!(top > 0.0)) throw DomainError("envelope window lies outside the half line");
        numerics::SemiInfiniteOptions opts;
        opts.limit = std::log(kHalfLineFloor);
        const auto lo = numerics::infimum_semi_infinite([&mu](double s) { return mu(std::exp(s)); }, std::log(top),
                                                        numerics::SearchDirection::Down, opts);
        env.mu_lower = lo.value;
        env.lower_finite = !lo.divergent && std::isfinite(lo.value);
        if (bottom > 0.0) {
            const auto hi = numerics::supremum_semi_infinite(mu, bottom, numerics::SearchDirection::Up);
            env.mu_upper = hi.value;
            env.upper_finite = !hi.divergent && std::isfinite(hi.value);
        } else {
            env.mu_upper = kInf;
            env.upper_finite = false;
        }
    }
    env.K_star = env.lower_finite ? std::max(0.0, g.k_plus() - env.mu_lower) : kInf;
    env.K_hat = env.upper_finite ? std::max(0.0, g.k_minus() + env.mu_upper) : kInf;
    return env;
}

double d_eps_formula(double eps, double t0, double sup_density, double k) {
    if (!(t0 >= 0.0) || !(t0 < 1.0)) throw DomainError("t0 must lie in [0, 1)");
    if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
    if (eps == 0.0) return 0.0;
    const double r = std::sqrt(1.0 - t0);
    return (kSqrt2OverPi * (1.0 / r + 2.0 * sup_density * r) + 2.0 * k) * eps;
}

double d_eps_upper(const DiffusionModel& model, const Boundary& g, double eps, double t0, double B_sup) {
    const DriftEnvelope env = drift_envelope(model, g, eps);
    if (!env.lower_finite) throw InapplicableError("drift is unbounded below near the boundary");
    return d_eps_formula(eps, t0, B_sup, env.K_star);
}

double d_eps_lower(const DiffusionModel& model, const Boundary& g, double eps, double t0, double C_sup) {
    if (model.interval() != DiffusionInterval::A) {
        throw InapplicableError("lower-boundary error terms are available on the whole line only");
    }
    const DriftEnvelope env = drift_envelope(model, g, eps);
    if (!env.upper_finite) throw InapplicableError("drift is unbounded above near the boundary");
    return d_eps_formula(eps, t0, C_sup, env.K_hat);
}

CrossingErrorCertificate certify(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g_plus,
                                 double eps, const std::optional<Boundary>& g_minus, const CertifyOptions& options) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("eps must be finite and non-negative");
    if (options.t0 && (!(*options.t0 >= 0.0) || !(*options.t0 <= kMaxT0))) {
        throw DomainError("t0 must lie in [0, 1 - 1e-4]");
    }
    if (g_plus.side() != Side::Upper) throw InvalidModelError("g_plus must be an upper boundary");
    check_compatible(model, ref);
    check_pairing(model, g_plus);
    CrossingErrorCertificate cert;
    cert.eps = eps;
    cert.side = g_minus ? CertificateSide::TwoSided : CertificateSide::OneSidedUpper;
    if (g_minus) {
        if (model.interval() != DiffusionInterval::A) {
            throw InapplicableError("two-sided bounds are available on the whole line only");
        }
        if (g_minus->side() != Side::Lower) throw InvalidModelError("g_minus must be a lower boundary");
        check_pairing(model, *g_minus);
        require_separated(g_plus, *g_minus);
    }
    if (eps == 0.0) {
        cert.t0 = options.t0.value_or(0.0);
        if (g_minus) {
            cert.D_eps_minus = 0.0;
            cert.at_g.D_eps_minus = 0.0;
            cert.at_g_minus_eps.D_eps_minus = 0.0;
        }
        return cert;
    }

    const BranchData b0 = build_branch(model, ref, g_plus, g_minus, eps, 0.0, options.grid_step);
    const BranchData b1 = build_branch(model, ref, g_plus, g_minus, eps, eps, options.grid_step);

    bool use_upper = upper_usable(b0) && upper_usable(b1);
    bool use_lower = g_minus && lower_usable(b0) && lower_usable(b1);
    if (!use_upper && !use_lower) throw InapplicableError("drift is unbounded near the boundary");
    if (g_minus && !(use_upper && use_lower)) {
        cert.applicable = false;
        cert.reason = use_upper ? "drift is unbounded above near the lower boundary; only the upper side is reported"
                                : "drift is unbounded below near the upper boundary; only the lower side is reported";
    } else if (!use_upper) {
        throw InapplicableError("drift is unbounded below near the boundary");
    }

    auto total_at = [&](double t0) {
        return std::max(branch_total(b0, eps, t0, use_upper, use_lower),
                        branch_total(b1, eps, t0, use_upper, use_lower));
    };

    double t0 = 0.0;
    if (options.t0) {
        t0 = *options.t0;
    } else {
        double best = total_at(0.0);
        const std::vector<BoundReport>& curve = use_upper ? b0.upper_curve : b0.lower_curve;
        for (const auto& r : curve) {
            if (r.t > kMaxT0) continue;
            const double v = total_at(r.t);
            if (v < best) {
                best = v;
                t0 = r.t;
            }
        }
        const auto refined = numerics::minimize_scalar(total_at, 0.0, kMaxT0, 1e-7);
        if (refined.min_value < best) t0 = refined.argmin;
    }

    cert.t0 = t0;
    cert.at_g = detail_at(b0, eps, t0, use_upper, use_lower);
    cert.at_g_minus_eps = detail_at(b1, eps, t0, use_upper, use_lower);
    if (!std::isfinite(cert.at_g.total) || !std::isfinite(cert.at_g_minus_eps.total)) {
        throw InapplicableError("density bound is vacuous on every admissible tail window");
    }
    const bool shifted_wins = cert.at_g_minus_eps.total > cert.at_g.total;
    const BranchDetail& win = shifted_wins ? cert.at_g_minus_eps : cert.at_g;
    cert.max_rule_branch = shifted_wins ? MaxRuleBranch::AtGMinusEps : MaxRuleBranch::AtG;
    cert.total = win.total;
    cert.D_eps = win.D_eps;
    cert.D_eps_minus = win.D_eps_minus;
    return cert;
}

CrossingErrorCertificate certify(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g_plus,
                                 const Boundary& f_plus, const std::optional<Boundary>& g_minus,
                                 const std::optional<Boundary>& f_minus, const CertifyOptions& options) {
    if (g_minus.has_value() != f_minus.has_value()) {
        throw InvalidModelError("lower boundary and its approximation must be given together");
    }
    double eps = measured_distance(g_plus, f_plus);
    if (g_minus) eps = std::max(eps, measured_distance(*g_minus, *f_minus));
    return certify(model, ref, g_plus, eps, g_minus, options);
}

double simple_bound(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double eps,
                    double grid_step) {
    check_compatible(model, ref);
    check_pairing(model, g);
    const DriftEnvelope env = drift_envelope(model, g, eps);
    if (!env.lower_finite) throw InapplicableError("drift is unbounded below near the boundary");
    const auto curve = bound_curve(model, ref, g, default_time_grid(0.0, grid_step));
    const double b_sup = sup_bound_over_tail(curve, 0.0);
    if (!std::isfinite(b_sup)) throw InapplicableError("density bound is vacuous somewhere on (0, 1]");
    return (4.0 * std::sqrt(b_sup / kPi) + 2.0 * env.K_star) * eps;
}

PiecewiseLinearCertificate piecewise_linear_certificate(const DiffusionModel& model, const ReferenceProcess& ref,
                                                        const Boundary& g, int n, std::optional<double> xi,
                                                        const CertifyOptions& options) {
    if (n < 1) throw DomainError("need at least one segment");
    const double curvature = xi ? *xi : certify_curvature(g);
    if (!(curvature >= 0.0)) throw DomainError("curvature bound must be non-negative");
    auto approx = piecewise_linear_approx(g, uniform_partition(n), curvature);
    const double eps = curvature / (8.0 * static_cast<double>(n) * n);
    auto cert = certify(model, ref, g, eps, std::nullopt, options);
    return {std::move(approx), curvature, n, std::move(cert)};
}

}  // namespace fptb
