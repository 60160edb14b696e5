#pragma once

#include <functional>

namespace fptb::numerics {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    int evaluations = 0;
};

inline constexpr double kDefaultQuadratureTol = 1e-10;

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b]. The interval with
/// the largest |K15 - G7| is bisected until the summed estimate drops below
/// tol. Throws ConvergenceError (carrying the best estimate) when
/// max_subdivisions is exhausted. b < a integrates with the sign flipped.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double tol = kDefaultQuadratureTol, int max_subdivisions = 4000);

/// Integral over [a, inf) through the substitution y = a + s / (1 - s).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       double tol = kDefaultQuadratureTol,
                                       int max_subdivisions = 4000);

}  // namespace fptb::numerics
