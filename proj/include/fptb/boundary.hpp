#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fptb/diffusion.hpp"

namespace fptb {

enum class Side { Upper, Lower };

std::string to_string(Side side);

enum class LipschitzSource {
    UserSupplied,
    GridCertified,        // forward differences on a grid, inflated by 5%
    DerivativeCertified,  // grid sup/inf of the supplied derivative
};

/// -K^- h <= g(t + h) - g(t) <= K^+ h on [0, 1]. Certified constants are
/// clamped to >= 0; user-supplied ones may be signed (K^- = -b for a rising
/// line a + b t keeps the density bound sharp) as long as K^- + K^+ >= 0.
struct LipschitzConstants {
    double k_minus = 0.0;
    double k_plus = 0.0;
};

inline constexpr int kDefaultCertificationGrid = 4096;

/// Certifies one-sided Lipschitz constants for g on [0, 1]. With a
/// derivative, K^+ = sup g' and K^- = sup (-g') over the grid; otherwise the
/// extreme forward-difference quotients are inflated by 5%.
LipschitzConstants certify_lipschitz(const RealFn& g, int grid_n = kDefaultCertificationGrid,
                                     const RealFn& g_prime = {});

struct RunningExtrema {
    double gbar;    // max_{0 <= s <= t} g(s), rounded outwards
    double gunder;  // min_{0 <= s <= t} g(s), rounded outwards
};

/// A time boundary g on [0, 1] with its Lipschitz certificate. Immutable and
/// cheap to copy; running extrema come from a table built at construction
/// whose per-cell bounds use the Lipschitz constants, so they never
/// undershoot the true extrema.
class Boundary {
public:
    static Boundary certified(RealFn g, Side side, RealFn g_prime = {},
                              int grid_n = kDefaultCertificationGrid);
    static Boundary with_constants(RealFn g, Side side, LipschitzConstants constants, RealFn g_prime = {});

    double operator()(double t) const { return g_(t); }
    const RealFn& function() const noexcept { return g_; }
    const RealFn& derivative() const noexcept { return g_prime_; }
    bool has_derivative() const noexcept { return static_cast<bool>(g_prime_); }

    Side side() const noexcept { return side_; }
    double k_minus() const noexcept { return constants_.k_minus; }
    double k_plus() const noexcept { return constants_.k_plus; }
    LipschitzConstants constants() const noexcept { return constants_; }
    LipschitzSource lipschitz_source() const noexcept { return source_; }

    RunningExtrema running_extrema(double t) const;
    /// Certified bounds of g over [0, 1].
    double min_value() const { return running_extrema(1.0).gunder; }
    double max_value() const { return running_extrema(1.0).gbar; }

    /// g + c with the same constants.
    Boundary shifted(double c) const;
    /// -g with the side flipped and K^+ / K^- swapped.
    Boundary negated() const;
    Boundary with_side(Side side) const;
    /// Same function with enlarged (or replaced) constants.
    Boundary with_lipschitz(LipschitzConstants constants) const;

private:
    struct Table;
    Boundary(RealFn g, RealFn g_prime, Side side, LipschitzConstants constants, LipschitzSource source);

    RealFn g_;
    RealFn g_prime_;
    Side side_;
    LipschitzConstants constants_;
    LipschitzSource source_;
    std::shared_ptr<const Table> table_;
};

RunningExtrema running_extrema(const Boundary& g, double t);

/// Upper bound for max over [s0, s1] of a function with values a, b at the
/// ends and one-sided Lipschitz constants (k_minus, k_plus).
double segment_max_bound(double a, double b, double h, LipschitzConstants k);
double segment_min_bound(double a, double b, double h, LipschitzConstants k);

/// Upper boundary must start above x, lower below; on interval B the boundary
/// must stay away from 0. Throws InvalidModelError otherwise.
void check_pairing(const DiffusionModel& model, const Boundary& g);

class PiecewiseLinearBoundary {
public:
    /// Knots must be strictly increasing from 0 to 1.
    explicit PiecewiseLinearBoundary(std::vector<std::pair<double, double>> nodes);

    double operator()(double t) const;
    double slope(std::size_t segment) const;
    const std::vector<std::pair<double, double>>& nodes() const noexcept { return nodes_; }
    std::size_t segments() const noexcept { return nodes_.size() - 1; }
    /// Largest knot gap.
    double rank() const noexcept { return rank_; }

    /// As a Boundary with the exact constants max / min slope.
    Boundary to_boundary(Side side) const;

private:
    std::vector<std::pair<double, double>> nodes_;
    double rank_ = 0.0;
};

struct PiecewiseLinearApproximation {
    PiecewiseLinearBoundary approximation;
    /// Certified sup |f - g|: fine-grid maximum plus an outward rounding term.
    double eps = 0.0;
    /// xi * delta^2 / 8 when a curvature bound xi is supplied.
    std::optional<double> analytic_eps;
};

inline constexpr int kPointsPerSegment = 64;

/// Interpolates g at the partition knots. `curvature_bound` is xi >= |g''|.
PiecewiseLinearApproximation piecewise_linear_approx(const Boundary& g, const std::vector<double>& partition,
                                                     std::optional<double> curvature_bound = std::nullopt,
                                                     int points_per_segment = kPointsPerSegment);

std::vector<double> uniform_partition(int n);

/// Certified sup_{[0,1]} |g - f| for an arbitrary Lipschitz f.
double certified_distance(const Boundary& g, const Boundary& f, int grid_n = 1 << 16);

/// sup |g''| on a grid from second differences, inflated by 5%. Uses the
/// derivative when present.
double certify_curvature(const Boundary& g, int grid_n = 1 << 14);

/// g(t) / r(t) with re-certified Lipschitz constants. Throws if r <= 0 on the
/// certification grid.
Boundary rescale_time_inhomogeneous(const Boundary& g, const RealFn& r,
                                    int grid_n = kDefaultCertificationGrid);

}  // namespace fptb
