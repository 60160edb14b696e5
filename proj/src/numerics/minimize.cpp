#include "fptb/numerics/minimize.hpp"

#include <cmath>
#include <vector>

#include "fptb/errors.hpp"

namespace fptb::numerics {

namespace {

constexpr double kInvPhi = 0.6180339887498948482;

double checked(const std::function<double(double)>& f, double y) {
    const double v = f(y);
    if (std::isnan(v)) throw DomainError("minimize: objective is NaN at a probe point");
    return v;
}

}  // namespace

ScalarMinResult minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol, int grid_points) {
    if (!(lo < hi)) throw DomainError("minimize_scalar: requires lo < hi");
    if (grid_points < 2) grid_points = 2;

    const double step = (hi - lo) / (grid_points - 1);
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double y = (i == grid_points - 1) ? hi : lo + i * step;
        const double v = checked(f, y);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    double best_arg = (best == grid_points - 1) ? hi : lo + best * step;
    if (std::isinf(best_value) && best_value < 0) {
        return {best_arg, best_value, {best_arg, best_arg}, true};
    }

    double a = lo + std::max(best - 1, 0) * step;
    double b = best + 1 >= grid_points - 1 ? hi : lo + (best + 1) * step;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = checked(f, c);
    double fd = checked(f, d);
    int iterations = 0;
    while (b - a > tol && iterations < 200) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = checked(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = checked(f, d);
        }
        ++iterations;
    }
    if (fc < best_value) {
        best_value = fc;
        best_arg = c;
    }
    if (fd < best_value) {
        best_value = fd;
        best_arg = d;
    }
    const double lo_bracket = std::min(a, best_arg);
    const double hi_bracket = std::max(b, best_arg);
    return {best_arg, best_value, {lo_bracket, hi_bracket}, b - a <= tol};
}

ScalarMaxResult maximize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                double tol, int grid_points) {
    auto negated = minimize_scalar([&f](double y) { return -f(y); }, lo, hi, tol, grid_points);
    return {negated.argmin, -negated.min_value, negated.bracket, negated.converged};
}

SemiInfiniteExtremum infimum_semi_infinite(const std::function<double(double)>& f, double anchor,
                                           SearchDirection direction,
                                           const SemiInfiniteOptions& options) {
    const bool down = direction == SearchDirection::Down;
    const bool has_limit = !std::isnan(options.limit);
    if (has_limit && (down ? options.limit >= anchor : options.limit <= anchor)) {
        throw DomainError("infimum_semi_infinite: limit lies on the wrong side of the anchor");
    }

    auto window = [&](double width) {
        double far = down ? anchor - width : anchor + width;
        bool clipped = false;
        if (has_limit && (down ? far <= options.limit : far >= options.limit)) {
            far = options.limit;
            clipped = true;
        }
        return std::pair{far, clipped};
    };

    double width = options.initial_width;
    auto [far, clipped] = window(width);
    auto result = down ? minimize_scalar(f, far, anchor) : minimize_scalar(f, anchor, far);
    SemiInfiniteExtremum out{result.min_value, result.argmin, false, 0};
    if (std::isinf(out.value) && out.value < 0) {
        out.divergent = true;
        return out;
    }

    bool improved_every_time = true;
    while (!clipped && out.doublings < options.max_doublings) {
        width *= 2.0;
        std::tie(far, clipped) = window(width);
        result = down ? minimize_scalar(f, far, anchor) : minimize_scalar(f, anchor, far);
        ++out.doublings;
        const double scale = std::max(1.0, std::abs(out.value));
        const bool improved = result.min_value < out.value - options.tol * scale;
        if (result.min_value < out.value) {
            out.value = result.min_value;
            out.argument = result.argmin;
        }
        if (std::isinf(out.value) && out.value < 0) {
            out.divergent = true;
            return out;
        }
        if (!improved) {
            improved_every_time = false;
            break;
        }
    }
    if (improved_every_time && out.doublings > 0) {
        out.divergent = true;
        out.value = -std::numeric_limits<double>::infinity();
    }
    return out;
}

SemiInfiniteExtremum supremum_semi_infinite(const std::function<double(double)>& f, double anchor,
                                            SearchDirection direction,
                                            const SemiInfiniteOptions& options) {
    auto inf = infimum_semi_infinite([&f](double y) { return -f(y); }, anchor, direction, options);
    inf.value = -inf.value;
    return inf;
}

}  // namespace fptb::numerics
