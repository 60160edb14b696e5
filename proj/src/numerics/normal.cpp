#include "fptb/numerics/normal.hpp"

#include <cmath>
#include <numbers>

namespace fptb::numerics {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
}

double normal_cdf(double z) noexcept {
    if (std::isnan(z)) return z;
    return 0.5 * std::erfc(-z * kInvSqrt2);
}

double normal_sf(double z) noexcept {
    if (std::isnan(z)) return z;
    return 0.5 * std::erfc(z * kInvSqrt2);
}

double normal_pdf(double z) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

}  // namespace fptb::numerics
