#pragma once

namespace fptb::numerics {

/// Modified Bessel function of the first kind I_eta(z) for eta >= 0, z >= 0.
/// Overflows to +inf beyond z ~ 713; use bessel_i_scaled there.
double bessel_i(double eta, double z);

/// exp(-z) * I_eta(z), finite for every z >= 0.
double bessel_i_scaled(double eta, double z);

/// exp(-z) * I_eta(z) / z^eta. The z -> 0 limit 1 / (2^eta Gamma(eta + 1))
/// is returned at z = 0, which is what the Bessel transition density needs
/// when the starting point sits at the origin.
double bessel_i_over_power_scaled(double eta, double z);

}  // namespace fptb::numerics
