#include "fptb/fpt_density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "fptb/errors.hpp"

namespace fptb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Memo {
    std::map<double, Functional> M;
    std::map<double, Functional> M_star;
    std::map<double, double> delta_G;
};

void validate_time(double t) {
    if (!(t > 0.0) || !(t <= 1.0)) {
        std::ostringstream os;
        os << "density bounds need t in (0, 1], got " << t;
        throw DomainError(os.str());
    }
}

struct Common {
    double gt;
    double x_bar;
    double delta_G;
    double log_q;
    RunningExtrema ext;
};

Common common_terms(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t,
                    Memo* memo) {
    Common c{};
    c.gt = g(t);
    c.ext = g.running_extrema(t);
    c.x_bar = model.interval() == DiffusionInterval::A ? model.x() : -model.x();
    c.log_q = log_reference_density(ref, t, model.x(), c.gt);
    if (memo) {
        auto it = memo->delta_G.find(c.gt);
        if (it == memo->delta_G.end()) it = memo->delta_G.emplace(c.gt, G_value(model, ref, c.gt, model.x())).first;
        c.delta_G = it->second;
    } else {
        c.delta_G = G_value(model, ref, c.gt, model.x());
    }
    return c;
}

Functional cached(std::map<double, Functional>* cache, double key, const std::function<Functional()>& compute) {
    if (!cache) return compute();
    auto it = cache->find(key);
    if (it == cache->end()) it = cache->emplace(key, compute()).first;
    return it->second;
}

double assemble(double prefactor, const Common& c, double t, double functional) {
    if (!(prefactor > 0.0)) return 0.0;
    const double log_value = std::log(prefactor / t) + c.log_q + c.delta_G - 0.5 * t * functional;
    return std::exp(log_value);
}

void fill_audit(BoundAudit& audit, const Common& c, const ReferenceProcess& ref) {
    audit.x_bar = c.x_bar;
    audit.delta_G = c.delta_G;
    audit.log_q = c.log_q;
    audit.q = std::exp(c.log_q);
    audit.dimension = ref.kind() == ReferenceProcess::Kind::Bessel ? ref.dimension() : 0;
    audit.gbar = c.ext.gbar;
    audit.gunder = c.ext.gunder;
}

void check_upper_inputs(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t) {
    validate_time(t);
    if (g.side() != Side::Upper) throw InvalidModelError("this bound needs an upper boundary");
    check_compatible(model, ref);
    check_pairing(model, g);
}

BoundValue compute_B(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t,
                     const Common& c, Memo* memo, BoundAudit& audit) {
    const Functional M = cached(memo ? &memo->M : nullptr, c.ext.gbar,
                                [&] { return functional_M(model, ref, c.ext.gbar); });
    audit.functional_name = "M";
    audit.functional = M.value;
    BoundValue out;
    if (M.divergent) {
        out.value = kInf;
        out.vacuous = true;
        out.reason = "M(t) is unbounded below; the bound is vacuous";
        return out;
    }
    out.value = assemble(c.gt + g.k_minus() * t - c.x_bar, c, t, M.value);
    return out;
}

BoundValue compute_B_star(const DiffusionModel& model, const Boundary& g, double t, const Common& c, Memo* memo,
                          BoundAudit& audit) {
    BoundValue out;
    if (model.interval() != DiffusionInterval::A) {
        out.reason = "lower bounds are available on the whole line only";
        return out;
    }
    const Functional Ms = cached(memo ? &memo->M_star : nullptr, c.ext.gbar,
                                 [&] { return functional_M_star(model, c.ext.gbar); });
    if (Ms.divergent) {
        out.reason = "M* unbounded";
        return out;
    }
    // g(t) - K^+ t is nonincreasing, so its minimum over [0, 1] is at t = 1.
    const double floor = g(1.0) - g.k_plus();
    if (!(model.x() < floor)) {
        std::ostringstream os;
        os << "precondition x < min(g(t) - K^+ t) = " << floor << " fails for x = " << model.x();
        out.reason = os.str();
        return out;
    }
    if (audit.functional_name.empty()) {
        audit.functional_name = "M*";
        audit.functional = Ms.value;
    }
    out.value = assemble(c.gt - g.k_plus() * t - model.x(), c, t, Ms.value);
    return out;
}

BoundReport upper_report(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t,
                         bool want_B, bool want_B_star, Memo* memo) {
    check_upper_inputs(model, ref, g, t);
    BoundReport r;
    r.t = t;
    r.side = Side::Upper;
    const Common c = common_terms(model, ref, g, t, memo);
    fill_audit(r.audit, c, ref);
    if (want_B) r.B = compute_B(model, ref, g, t, c, memo, r.audit);
    if (want_B_star) r.B_star = compute_B_star(model, g, t, c, memo, r.audit);
    return r;
}

BoundReport reflected_report(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t,
                             Memo* memo) {
    validate_time(t);
    if (g.side() != Side::Lower) throw InvalidModelError("this bound needs a lower boundary");
    if (model.interval() != DiffusionInterval::A || ref.kind() != ReferenceProcess::Kind::BrownianMotion) {
        throw InapplicableError("lower boundaries are supported on the whole line only");
    }
    const DiffusionModel mirrored = model.reflected();
    const Boundary flipped = g.negated();
    BoundReport inner = upper_report(mirrored, ref, flipped, t, true, true, memo);
    BoundReport r;
    r.t = t;
    r.side = Side::Lower;
    r.C = inner.B;
    r.C_star = inner.B_star;
    r.audit = inner.audit;
    if (r.audit.functional_name == "M") r.audit.functional_name = "L";
    if (r.audit.functional_name == "M*") r.audit.functional_name = "L*";
    r.audit.gbar = -inner.audit.gunder;
    r.audit.gunder = -inner.audit.gbar;
    r.audit.note =
        "reflected problem: drift y -> -mu(-y), start -x, boundary -g; C prefactor (x - g(t) + K^+ t), "
        "C* prefactor (x - g(t) - K^- t)";
    return r;
}

}  // namespace

BoundReport upper_bound_B(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t) {
    return upper_report(model, ref, g, t, true, false, nullptr);
}

BoundReport lower_bound_B_star(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                               double t) {
    if (model.interval() != DiffusionInterval::A) {
        throw InapplicableError("lower bounds are supported on the whole line only");
    }
    return upper_report(model, ref, g, t, false, true, nullptr);
}

BoundReport upper_boundary_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                  double t) {
    return upper_report(model, ref, g, t, true, true, nullptr);
}

BoundReport lower_boundary_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                  double t) {
    return reflected_report(model, ref, g, t, nullptr);
}

BoundReport density_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t) {
    return g.side() == Side::Upper ? upper_boundary_bounds(model, ref, g, t) : lower_boundary_bounds(model, ref, g, t);
}

std::vector<double> default_time_grid(double t0, double step) {
    if (!(t0 >= 0.0) || !(t0 < 1.0)) throw DomainError("grid start must lie in [0, 1)");
    if (!(step > 0.0) || step > 0.1) throw DomainError("grid step must lie in (0, 0.1]");
    std::vector<double> all;
    const double first = std::min(step, 1e-3);
    for (int k = 0; k < 10; ++k) {
        const double t = 1e-4 * std::pow(10.0, k / 10.0);
        if (t < first) all.push_back(t);
    }
    const int n = static_cast<int>(std::ceil(1.0 / step - 1e-9));
    for (int i = 1; i <= n; ++i) all.push_back(static_cast<double>(i) / n);
    all.back() = 1.0;
    auto it = std::lower_bound(all.begin(), all.end(), t0);
    if (it != all.begin() && (it == all.end() || *it > t0)) --it;
    return std::vector<double>(it, all.end());
}

std::vector<BoundReport> bound_curve(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                     const std::vector<double>& grid) {
    Memo memo;
    std::vector<BoundReport> out;
    out.reserve(grid.size());
    for (double t : grid) {
        if (g.side() == Side::Upper) {
            out.push_back(upper_report(model, ref, g, t, true, true, &memo));
        } else {
            out.push_back(reflected_report(model, ref, g, t, &memo));
        }
    }
    return out;
}

double sup_bound_over_tail(const std::vector<BoundReport>& reports, double t0) {
    if (reports.empty()) throw DomainError("sup over an empty grid");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(reports.size());
    for (const auto& r : reports) {
        const BoundValue& b = r.upper();
        pts.emplace_back(r.t, b.present() ? *b.value : kInf);
    }
    std::sort(pts.begin(), pts.end());
    std::size_t first = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].first <= t0) first = i;
    }
    std::vector<std::pair<double, double>> w(pts.begin() + static_cast<std::ptrdiff_t>(first), pts.end());
    double best = 0.0;
    for (const auto& p : w) best = std::max(best, p.second);
    if (std::isinf(best)) return kInf;
    if (w.size() < 2) return best;
    std::vector<double> slope(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        slope[i] = std::abs(w[i + 1].second - w[i].second) / (w[i + 1].first - w[i].first);
    }
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        double s = slope[i];
        if (i > 0) s = std::max(s, slope[i - 1]);
        if (i + 2 < w.size()) s = std::max(s, slope[i + 1]);
        const double h = w[i + 1].first - w[i].first;
        const double cell = std::max(w[i].second, w[i + 1].second) + 0.5 * h * s;
        if (std::isnan(cell)) return kInf;
        best = std::max(best, cell);
    }
    return best;
}

DimensionChoice optimize_dimension(const DiffusionModel& model, const Boundary& g, const std::vector<double>& grid,
                                   int d_max) {
    if (model.interval() != DiffusionInterval::B) {
        throw InvalidModelError("dimension optimisation applies to half-line models");
    }
    if (d_max < 3) throw DomainError("d_max must be at least 3");
    if (grid.empty()) throw DomainError("empty time grid");
    DimensionChoice choice;
    double best = kInf;
    for (int d = 3; d <= d_max; ++d) {
        DimensionReport rep;
        rep.dimension = d;
        rep.reports = bound_curve(model, ReferenceProcess::bessel(d), g, grid);
        double sup = 0.0;
        for (const auto& r : rep.reports) {
            const double v = r.B.present() ? *r.B.value : kInf;
            sup = std::max(sup, v);
        }
        rep.sup_bound = sup;
        if (choice.d_best == 0 || sup < best) {
            best = sup;
            choice.d_best = d;
        }
        choice.candidates.push_back(std::move(rep));
    }
    return choice;
}

}  // namespace fptb
