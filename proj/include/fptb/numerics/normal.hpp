#pragma once

namespace fptb::numerics {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

/// Standard normal distribution function, total on the extended reals.
double normal_cdf(double z) noexcept;

/// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z) noexcept;

double normal_pdf(double z) noexcept;

}  // namespace fptb::numerics
