#pragma once

#include <functional>
#include <limits>
#include <utility>

namespace fptb::numerics {

struct ScalarMinResult {
    double argmin = 0.0;
    double min_value = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    bool converged = false;
};

struct ScalarMaxResult {
    double argmax = 0.0;
    double max_value = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    bool converged = false;
};

inline constexpr int kDefaultGridPoints = 256;

/// Global minimum of f on [lo, hi]: a uniform grid pre-pass (endpoints
/// included) locates the best cell, which is then refined by golden-section
/// search down to width tol. The result is never worse than the grid minimum.
ScalarMinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol = 1e-8, int grid_points = kDefaultGridPoints);

ScalarMaxResult maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol = 1e-8, int grid_points = kDefaultGridPoints);

enum class SearchDirection {
    Down,  // over (-inf, anchor]
    Up,    // over [anchor, +inf)
};

struct SemiInfiniteOptions {
    double tol = 1e-9;
    double initial_width = 8.0;
    int max_doublings = 40;
    /// Hard stop for the window (e.g. a coordinate where f stops being
    /// representable). The window never extends past it.
    double limit = std::numeric_limits<double>::quiet_NaN();
};

struct SemiInfiniteExtremum {
    /// +-inf when divergent.
    double value = 0.0;
    double argument = 0.0;
    bool divergent = false;
    int doublings = 0;
};

/// Infimum of f over a half-line anchored at `anchor`. The window
/// [anchor - W, anchor] (or [anchor, anchor + W]) starts at initial_width and
/// doubles until the minimum stops improving by more than tol. If it improves
/// at every doubling until max_doublings or the limit is reached, the
/// infimum is reported as -inf with divergent set.
SemiInfiniteExtremum infimum_semi_infinite(const std::function<double(double)>& f, double anchor,
                                           SearchDirection direction,
                                           const SemiInfiniteOptions& options = {});

SemiInfiniteExtremum supremum_semi_infinite(const std::function<double(double)>& f, double anchor,
                                            SearchDirection direction,
                                            const SemiInfiniteOptions& options = {});

}  // namespace fptb::numerics
