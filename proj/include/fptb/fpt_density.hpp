#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/diffusion.hpp"

namespace fptb {

/// One bound value; absent values carry a reason. A divergent functional
/// gives +inf flagged as vacuous.
struct BoundValue {
    std::optional<double> value;
    std::string reason;
    bool vacuous = false;

    bool present() const noexcept { return value.has_value(); }
};

struct BoundAudit {
    double x_bar = 0.0;
    double delta_G = 0.0;        // G(g(t)) - G(x)
    std::string functional_name; // "M", "M*", "L" or "L*"
    double functional = 0.0;
    double q = 0.0;              // reference density at (t, x, g(t))
    double log_q = 0.0;
    int dimension = 0;           // Bessel dimension, 0 for Brownian motion
    double gbar = 0.0;
    double gunder = 0.0;
    std::string note;
};

struct BoundReport {
    double t = 0.0;
    Side side = Side::Upper;
    BoundValue B;       // upper bound, upper boundary
    BoundValue B_star;  // lower bound, upper boundary
    BoundValue C;       // upper bound, lower boundary
    BoundValue C_star;  // lower bound, lower boundary
    BoundAudit audit;

    /// B for upper boundaries, C for lower ones.
    const BoundValue& upper() const noexcept { return side == Side::Upper ? B : C; }
    const BoundValue& lower() const noexcept { return side == Side::Upper ? B_star : C_star; }
};

/// B(g, t) = (1/t)(g(t) + K^- t - xbar) q(t, x, g(t)) exp(G(g(t)) - G(x) - (t/2) M(t)),
/// xbar = x on interval A and -x on interval B, M(t) taken over y <= gbar(t).
BoundReport upper_bound_B(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t);

/// B*(g, t) = (1/t)(g(t) - K^+ t - x) q exp(G(g(t)) - G(x) - (t/2) M*(t)).
/// Interval A only; absent when M* is unbounded or x >= min (g(t) - K^+ t).
BoundReport lower_bound_B_star(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                               double t);

/// Both bounds for an upper boundary in one report.
BoundReport upper_boundary_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                  double t);

/// C and C* for a lower boundary, computed from the reflected problem
/// (drift y -> -mu(-y), start -x, boundary -g with K^+ and K^- swapped).
BoundReport lower_boundary_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                  double t);

/// Dispatches on the boundary side.
BoundReport density_bounds(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g, double t);

/// Geometric points from 1e-4 to 1e-3, then a uniform grid with the given
/// step up to 1. Points below t0 are dropped except the last one before t0.
std::vector<double> default_time_grid(double t0 = 0.0, double step = 1e-3);

/// Reports over a grid; functional extrema are memoized by gbar / gunder.
std::vector<BoundReport> bound_curve(const DiffusionModel& model, const ReferenceProcess& ref, const Boundary& g,
                                     const std::vector<double>& grid);

/// Grid sup over [t0, 1] of the upper bound, with each cell inflated by
/// half its width times the largest neighbouring finite-difference slope.
double sup_bound_over_tail(const std::vector<BoundReport>& reports, double t0);

struct DimensionReport {
    int dimension = 0;
    double sup_bound = 0.0;
    std::vector<BoundReport> reports;
};

struct DimensionChoice {
    int d_best = 0;
    std::vector<DimensionReport> candidates;
};

/// Evaluates Bessel references d = 3..d_max on the grid and picks the one
/// with the smallest sup of B. Ties go to the smaller dimension.
DimensionChoice optimize_dimension(const DiffusionModel& model, const Boundary& g, const std::vector<double>& grid,
                                   int d_max = 13);

}  // namespace fptb
