#include "fptb/numerics/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fptb/errors.hpp"

namespace fptb::numerics {

namespace {

constexpr double kSeriesLimit = 15.0;

void check_arguments(double eta, double z) {
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("bessel_i: order must be finite and >= 0");
    if (!(z >= 0.0)) throw DomainError("bessel_i: argument must be >= 0");
}

// sum_k (z/2)^{2k} / (2^eta k! Gamma(k + eta + 1)) = I_eta(z) / z^eta
double series_over_power(double eta, double z) {
    double term = std::exp(-eta * std::numbers::ln2 - std::lgamma(eta + 1.0));
    double sum = term;
    const double quarter_z2 = 0.25 * z * z;
    for (int k = 0; k < 500; ++k) {
        term *= quarter_z2 / ((k + 1.0) * (k + 1.0 + eta));
        sum += term;
        if (term <= 1e-17 * sum) break;
    }
    return sum;
}

// Large-argument expansion of exp(-z) I_eta(z). Terminates exactly for
// half-integer orders; the neglected exp(-2z) branch is below 1e-13 at z = 15.
double asymptotic_scaled(double eta, double z) {
    const double mu = 4.0 * eta * eta;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * z);
        if (next == 0.0) break;
        if (std::abs(next) > std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace

double bessel_i_over_power_scaled(double eta, double z) {
    check_arguments(eta, z);
    if (std::isinf(z)) return 0.0;
    if (z < kSeriesLimit) return std::exp(-z) * series_over_power(eta, z);
    return asymptotic_scaled(eta, z) / std::pow(z, eta);
}

double bessel_i_scaled(double eta, double z) {
    check_arguments(eta, z);
    if (std::isinf(z)) return 0.0;
    if (z < kSeriesLimit) return std::exp(-z) * series_over_power(eta, z) * std::pow(z, eta);
    return asymptotic_scaled(eta, z);
}

double bessel_i(double eta, double z) {
    check_arguments(eta, z);
    if (std::isinf(z)) return std::numeric_limits<double>::infinity();
    if (z < kSeriesLimit) return series_over_power(eta, z) * std::pow(z, eta);
    return asymptotic_scaled(eta, z) * std::exp(z);
}

}  // namespace fptb::numerics
