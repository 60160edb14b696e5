#include "fptb/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fptb/errors.hpp"

namespace fptb {

namespace {

constexpr int kTableCells = 4096;
constexpr double kGridInflation = 1.05;
constexpr double kEndpointNudge = 1e-9;

double checked_value(const RealFn& g, double t, const char* what) {
    const double v = g(t);
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << what << " is not finite at t = " << t;
        throw InvalidModelError(os.str());
    }
    return v;
}

double derivative_at(const RealFn& gp, double t) {
    double v = gp(t);
    if (!std::isfinite(v)) {
        const double nudged = t <= 0.5 ? t + kEndpointNudge : t - kEndpointNudge;
        v = gp(nudged);
    }
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "boundary derivative is not finite at t = " << t;
        throw InvalidModelError(os.str());
    }
    return v;
}

}  // namespace

std::string to_string(Side side) { return side == Side::Upper ? "upper" : "lower"; }

LipschitzConstants certify_lipschitz(const RealFn& g, int grid_n, const RealFn& g_prime) {
    if (!g) throw InvalidModelError("boundary function is empty");
    if (grid_n < 1024) throw DomainError("certification grid must have at least 1024 cells");
    LipschitzConstants k;
    if (g_prime) {
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= grid_n; ++i) {
            const double v = derivative_at(g_prime, static_cast<double>(i) / grid_n);
            hi = std::max(hi, v);
            lo = std::min(lo, v);
        }
        k.k_plus = std::max(0.0, hi);
        k.k_minus = std::max(0.0, -lo);
        return k;
    }
    const double h = 1.0 / grid_n;
    double prev = checked_value(g, 0.0, "boundary");
    double hi = 0.0;
    double lo = 0.0;
    for (int i = 1; i <= grid_n; ++i) {
        const double cur = checked_value(g, static_cast<double>(i) / grid_n, "boundary");
        const double q = (cur - prev) / h;
        hi = std::max(hi, q);
        lo = std::min(lo, q);
        prev = cur;
    }
    k.k_plus = kGridInflation * hi;
    k.k_minus = kGridInflation * (-lo);
    return k;
}

double segment_max_bound(double a, double b, double h, LipschitzConstants k) {
    const double ends = std::max(a, b);
    if (h <= 0.0) return ends;
    const double total = k.k_plus + k.k_minus;
    if (total <= 0.0) return ends;
    const double u = std::clamp((b - a + k.k_minus * h) / total, 0.0, h);
    const double peak = std::min(a + k.k_plus * u, b + k.k_minus * (h - u));
    return std::max(ends, peak);
}

double segment_min_bound(double a, double b, double h, LipschitzConstants k) {
    const double ends = std::min(a, b);
    if (h <= 0.0) return ends;
    const double total = k.k_plus + k.k_minus;
    if (total <= 0.0) return ends;
    const double u = std::clamp((a - b + k.k_plus * h) / total, 0.0, h);
    const double trough = std::max(a - k.k_minus * u, b - k.k_plus * (h - u));
    return std::min(ends, trough);
}

struct Boundary::Table {
    std::vector<double> nodes;      // g(i / N)
    std::vector<double> max_before; // max over cells [0, i) and g(0)
    std::vector<double> min_before;
};

Boundary::Boundary(RealFn g, RealFn g_prime, Side side, LipschitzConstants constants, LipschitzSource source)
    : g_(std::move(g)), g_prime_(std::move(g_prime)), side_(side), constants_(constants), source_(source) {
    if (!std::isfinite(constants_.k_minus) || !std::isfinite(constants_.k_plus) ||
        !(constants_.k_minus + constants_.k_plus >= 0.0)) {
        throw InvalidModelError("Lipschitz constants must be finite with K^- + K^+ >= 0");
    }
    auto table = std::make_shared<Table>();
    table->nodes.resize(kTableCells + 1);
    for (int i = 0; i <= kTableCells; ++i) {
        table->nodes[i] = checked_value(g_, static_cast<double>(i) / kTableCells, "boundary");
    }
    const double h = 1.0 / kTableCells;
    table->max_before.resize(kTableCells + 1);
    table->min_before.resize(kTableCells + 1);
    table->max_before[0] = table->nodes[0];
    table->min_before[0] = table->nodes[0];
    for (int i = 0; i < kTableCells; ++i) {
        const double a = table->nodes[i];
        const double b = table->nodes[i + 1];
        table->max_before[i + 1] = std::max(table->max_before[i], segment_max_bound(a, b, h, constants_));
        table->min_before[i + 1] = std::min(table->min_before[i], segment_min_bound(a, b, h, constants_));
    }
    table_ = std::move(table);
}

Boundary Boundary::certified(RealFn g, Side side, RealFn g_prime, int grid_n) {
    const LipschitzConstants k = certify_lipschitz(g, grid_n, g_prime);
    const LipschitzSource src = g_prime ? LipschitzSource::DerivativeCertified : LipschitzSource::GridCertified;
    return Boundary(std::move(g), std::move(g_prime), side, k, src);
}

Boundary Boundary::with_constants(RealFn g, Side side, LipschitzConstants constants, RealFn g_prime) {
    if (!g) throw InvalidModelError("boundary function is empty");
    return Boundary(std::move(g), std::move(g_prime), side, constants, LipschitzSource::UserSupplied);
}

RunningExtrema Boundary::running_extrema(double t) const {
    if (!(t >= 0.0)) throw DomainError("running extrema need t >= 0");
    t = std::min(t, 1.0);
    const int k = std::min(kTableCells - 1, static_cast<int>(std::floor(t * kTableCells)));
    const double s0 = static_cast<double>(k) / kTableCells;
    const double a = table_->nodes[k];
    const double h = t - s0;
    if (h <= 0.0) return {table_->max_before[k], table_->min_before[k]};
    const double b = g_(t);
    return {std::max(table_->max_before[k], segment_max_bound(a, b, h, constants_)),
            std::min(table_->min_before[k], segment_min_bound(a, b, h, constants_))};
}

Boundary Boundary::shifted(double c) const {
    RealFn g = [f = g_, c](double t) { return f(t) + c; };
    return Boundary(std::move(g), g_prime_, side_, constants_, source_);
}

Boundary Boundary::negated() const {
    RealFn g = [f = g_](double t) { return -f(t); };
    RealFn gp;
    if (g_prime_) gp = [f = g_prime_](double t) { return -f(t); };
    const Side flipped = side_ == Side::Upper ? Side::Lower : Side::Upper;
    return Boundary(std::move(g), std::move(gp), flipped, {constants_.k_plus, constants_.k_minus}, source_);
}

Boundary Boundary::with_side(Side side) const {
    Boundary copy = *this;
    copy.side_ = side;
    return copy;
}

Boundary Boundary::with_lipschitz(LipschitzConstants constants) const {
    return Boundary(g_, g_prime_, side_, constants, LipschitzSource::UserSupplied);
}

RunningExtrema running_extrema(const Boundary& g, double t) { return g.running_extrema(t); }

void check_pairing(const DiffusionModel& model, const Boundary& g) {
    const double g0 = g(0.0);
    const double x = model.x();
    if (g.side() == Side::Upper && !(g0 > x)) {
        std::ostringstream os;
        os << "upper boundary must start strictly above the initial point: g(0) = " << g0 << ", x = " << x;
        throw InvalidModelError(os.str());
    }
    if (g.side() == Side::Lower && !(g0 < x)) {
        std::ostringstream os;
        os << "lower boundary must start strictly below the initial point: g(0) = " << g0 << ", x = " << x;
        throw InvalidModelError(os.str());
    }
    if (model.interval() == DiffusionInterval::B && !(g.min_value() > 0.0)) {
        throw InvalidModelError("boundary must stay strictly positive on the half line");
    }
}

PiecewiseLinearBoundary::PiecewiseLinearBoundary(std::vector<std::pair<double, double>> nodes)
    : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw DomainError("piecewise-linear boundary needs at least two knots");
    if (nodes_.front().first != 0.0 || nodes_.back().first != 1.0) {
        throw DomainError("piecewise-linear knots must span [0, 1]");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double gap = nodes_[i].first - nodes_[i - 1].first;
        if (!(gap > 0.0)) throw DomainError("piecewise-linear knots must be strictly increasing");
        if (!std::isfinite(nodes_[i].second) || !std::isfinite(nodes_[i - 1].second)) {
            throw DomainError("piecewise-linear values must be finite");
        }
        rank_ = std::max(rank_, gap);
    }
}

double PiecewiseLinearBoundary::operator()(double t) const {
    if (t <= 0.0) return nodes_.front().second;
    if (t >= 1.0) return nodes_.back().second;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                               [](double v, const std::pair<double, double>& n) { return v < n.first; });
    const auto& right = *it;
    const auto& left = *(it - 1);
    const double w = (t - left.first) / (right.first - left.first);
    return left.second + w * (right.second - left.second);
}

double PiecewiseLinearBoundary::slope(std::size_t segment) const {
    const auto& l = nodes_.at(segment);
    const auto& r = nodes_.at(segment + 1);
    return (r.second - l.second) / (r.first - l.first);
}

Boundary PiecewiseLinearBoundary::to_boundary(Side side) const {
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < segments(); ++i) {
        hi = std::max(hi, slope(i));
        lo = std::min(lo, slope(i));
    }
    auto self = std::make_shared<PiecewiseLinearBoundary>(*this);
    RealFn g = [self](double t) { return (*self)(t); };
    return Boundary::with_constants(std::move(g), side, {-lo, hi});
}

std::vector<double> uniform_partition(int n) {
    if (n < 1) throw DomainError("partition needs at least one segment");
    std::vector<double> p(n + 1);
    for (int i = 0; i <= n; ++i) p[i] = static_cast<double>(i) / n;
    p.back() = 1.0;
    return p;
}

PiecewiseLinearApproximation piecewise_linear_approx(const Boundary& g, const std::vector<double>& partition,
                                                     std::optional<double> curvature_bound,
                                                     int points_per_segment) {
    if (points_per_segment < kPointsPerSegment) {
        throw DomainError("at least 64 points per segment are required");
    }
    if (curvature_bound && !(*curvature_bound >= 0.0)) throw DomainError("curvature bound must be >= 0");
    std::vector<std::pair<double, double>> nodes;
    nodes.reserve(partition.size());
    for (double t : partition) nodes.emplace_back(t, g(t));
    PiecewiseLinearBoundary f(std::move(nodes));

    double eps = 0.0;
    for (std::size_t s = 0; s < f.segments(); ++s) {
        const double t0 = f.nodes()[s].first;
        const double t1 = f.nodes()[s + 1].first;
        const double hs = (t1 - t0) / points_per_segment;
        double worst = 0.0;
        for (int j = 0; j <= points_per_segment; ++j) {
            const double t = j == points_per_segment ? t1 : t0 + j * hs;
            worst = std::max(worst, std::abs(f(t) - g(t)));
        }
        double segment_eps;
        if (curvature_bound) {
            // chord deviation is at most xi h^2 / 8; the grid value only helps when it is smaller
            const double width = t1 - t0;
            segment_eps = std::min(*curvature_bound * width * width / 8.0, worst + *curvature_bound * hs * hs / 8.0);
        } else {
            const double sl = f.slope(s);
            double lip = std::max(std::abs(sl - g.k_plus()), std::abs(sl + g.k_minus()));
            if (g.has_derivative()) {
                // |g' - slope| sampled on the same grid, as for derivative-certified constants
                double d = 0.0;
                for (int j = 0; j <= points_per_segment; ++j) {
                    d = std::max(d, std::abs(g.derivative()(j == points_per_segment ? t1 : t0 + j * hs) - sl));
                }
                lip = std::min(lip, d);
            }
            segment_eps = worst + lip * hs / 2.0;
        }
        eps = std::max(eps, segment_eps);
    }
    PiecewiseLinearApproximation out{std::move(f), eps, std::nullopt};
    if (curvature_bound) {
        const double d = out.approximation.rank();
        out.analytic_eps = *curvature_bound * d * d / 8.0;
    }
    return out;
}

double certified_distance(const Boundary& g, const Boundary& f, int grid_n) {
    if (grid_n < 1) throw DomainError("grid must be positive");
    const double h = 1.0 / grid_n;
    double worst = 0.0;
    for (int i = 0; i <= grid_n; ++i) {
        const double t = static_cast<double>(i) / grid_n;
        worst = std::max(worst, std::abs(g(t) - f(t)));
    }
    const double lip = std::max({0.0, g.k_plus() + f.k_minus(), g.k_minus() + f.k_plus()});
    return worst + lip * h / 2.0;
}

double certify_curvature(const Boundary& g, int grid_n) {
    if (grid_n < 16) throw DomainError("grid too small");
    const double h = 1.0 / grid_n;
    double worst = 0.0;
    if (g.has_derivative()) {
        double prev = derivative_at(g.derivative(), 0.0);
        for (int i = 1; i <= grid_n; ++i) {
            const double cur = derivative_at(g.derivative(), i * h);
            worst = std::max(worst, std::abs(cur - prev) / h);
            prev = cur;
        }
    } else {
        for (int i = 1; i < grid_n; ++i) {
            const double t = i * h;
            worst = std::max(worst, std::abs(g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h));
        }
    }
    return kGridInflation * worst;
}

Boundary rescale_time_inhomogeneous(const Boundary& g, const RealFn& r, int grid_n) {
    if (!r) throw InvalidModelError("scale function is empty");
    for (int i = 0; i <= grid_n; ++i) {
        const double t = static_cast<double>(i) / grid_n;
        const double v = r(t);
        if (!(v > 0.0) || !std::isfinite(v)) {
            std::ostringstream os;
            os << "scale function must be positive, got r(" << t << ") = " << v;
            throw InvalidModelError(os.str());
        }
    }
    RealFn scaled = [gf = g.function(), r](double t) { return gf(t) / r(t); };
    return Boundary::certified(std::move(scaled), g.side(), {}, grid_n);
}

}  // namespace fptb
