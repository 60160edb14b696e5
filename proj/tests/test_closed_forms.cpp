#include <gtest/gtest.h>

#include <cmath>

#include "fptb/closed_forms.hpp"
#include "fptb/errors.hpp"
#include "fptb/numerics/normal.hpp"
#include "fptb/numerics/quadrature.hpp"

using namespace fptb;
using numerics::normal_cdf;
using numerics::normal_pdf;

namespace {
const DanielsParams kDaniels{0.5, 0.5, 0.5};
const OUParams kOU{};
}  // namespace

TEST(DanielsBoundary, Values) {
    EXPECT_NEAR(daniels_boundary(kDaniels, 1e-8), 0.5, 1e-7);
    // independent evaluation of delta - t/(2 delta) log(k1/2 + sqrt(k1^2/4 + k2 exp(-4 delta^2 / t))) at t = 1
    EXPECT_NEAR(daniels_boundary(kDaniels, 1.0), 0.7924575181938882, 1e-14);
    const DanielsParams flat_log{0.8, 1.0, 0.0};
    for (double t : {0.1, 0.5, 1.0}) EXPECT_NEAR(daniels_boundary(flat_log, t), 0.8, 1e-15);
}

TEST(DanielsBoundary, DerivativeMatchesFiniteDifference) {
    for (double t : {0.05, 0.3, 0.7, 0.99}) {
        const double h = 1e-6;
        const double fd = (daniels_boundary(kDaniels, t + h) - daniels_boundary(kDaniels, t - h)) / (2 * h);
        EXPECT_NEAR(daniels_boundary_derivative(kDaniels, t), fd, 1e-7);
    }
}

TEST(DanielsBoundary, RejectsInvalidParameters) {
    EXPECT_THROW((DanielsParams{0.5, 0.5, -0.1}.validate()), DomainError);
    EXPECT_THROW((DanielsParams{0.0, 0.5, 0.5}.validate()), DomainError);
    EXPECT_THROW(daniels_fpt_density(kDaniels, 0.2, 0.5), InapplicableError);
}

TEST(DanielsDensity, UnimodalSubprobability) {
    int turns = 0;
    double prev = daniels_fpt_density(kDaniels, 0.0, 0.01);
    bool rising = true;
    for (int i = 2; i <= 100; ++i) {
        const double v = daniels_fpt_density(kDaniels, 0.0, i / 100.0);
        if (rising && v < prev) {
            rising = false;
            ++turns;
        } else if (!rising && v > prev) {
            ++turns;
        }
        prev = v;
    }
    EXPECT_EQ(turns, 1);
    const double head = numerics::integrate([](double t) { return daniels_fpt_density(kDaniels, 0.0, t); }, 0.0, 1.0).value;
    const double tail = numerics::integrate([](double t) { return daniels_fpt_density(kDaniels, 0.0, t); }, 1.0, 50.0).value;
    EXPECT_GT(head, 0.0);
    EXPECT_LE(head + tail, 1.0 + 1e-9);
}

TEST(DanielsDensity, LogFormAgrees) {
    for (double t : {0.05, 0.5, 1.0}) {
        EXPECT_NEAR(std::exp(daniels_log_fpt_density(kDaniels, 0.0, t)) / daniels_fpt_density(kDaniels, 0.0, t), 1.0,
                    1e-13);
    }
}

TEST(OUTransition, LimitAndMoments) {
    const double var = 1.0 / (2.0 * kOU.theta);
    for (double z : {0.0, 2.0, 3.1}) {
        const double stationary = std::exp(-(z - kOU.mu) * (z - kOU.mu) / (2 * var)) / std::sqrt(2 * M_PI * var);
        EXPECT_NEAR(ou_transition_density(kOU, 50.0, 1.0, z), stationary, 1e-10);
    }
    auto mass = [&](double t, double x, int moment) {
        auto f = [&](double z) { return std::pow(z, moment) * ou_transition_density(kOU, t, x, z); };
        return numerics::integrate(f, -20.0, 25.0, 1e-12).value;
    };
    EXPECT_NEAR(mass(0.3, 1.0, 0), 1.0, 1e-10);
    EXPECT_NEAR(mass(0.5, 1.0, 1), 2.0 - std::exp(-0.25), 1e-10);
}

TEST(OUHyperbolic, DensityProperties) {
    EXPECT_NEAR(ou_hyperbolic_boundary(kOU, 0.0), 2.0, 1e-15);
    EXPECT_LT(ou_hyperbolic_fpt_density(kOU, 1e-6), 1e-100);
    for (double t : {0.1, 0.5, 1.0}) {
        EXPECT_GT(ou_hyperbolic_fpt_density(kOU, t), 0.0);
        EXPECT_NEAR(std::exp(ou_hyperbolic_log_fpt_density(kOU, t)) / ou_hyperbolic_fpt_density(kOU, t), 1.0, 1e-12);
        const double h = 1e-6;
        const double fd = (ou_hyperbolic_boundary(kOU, t + h) - ou_hyperbolic_boundary(kOU, t - h)) / (2 * h);
        EXPECT_NEAR(ou_hyperbolic_boundary_derivative(kOU, t), fd, 1e-7);
    }
    const double p = numerics::integrate([](double t) { return ou_hyperbolic_fpt_density(kOU, t); }, 0.0, 1.0).value;
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
}

TEST(BmLinear, LevelCrossing) {
    EXPECT_NEAR(bm_linear_fpt_density(1.0, 0.0, 0.0, 0.0, 1.0), normal_pdf(1.0), 1e-15);
    // a=1, b=1: (a / t^{3/2}) phi((a + b t) / sqrt t) at t = 0.5
    EXPECT_NEAR(bm_linear_fpt_density(1.0, 1.0, 0.0, 0.0, 0.5),
                1.0 / std::pow(0.5, 1.5) * normal_pdf(1.5 / std::sqrt(0.5)), 1e-15);
}

TEST(BmLinear, TotalCrossingByQuadrature) {
    const struct {
        double a, b, c, x;
    } cases[] = {{1.0, 0.5, 0.0, 0.0}, {2.0, 0.3, -0.2, 0.5}, {1.0, -0.5, 0.0, 0.0}, {0.5, 0.0, 0.4, 0.0}};
    for (const auto& k : cases) {
        auto f = [&](double t) { return bm_linear_fpt_density(k.a, k.b, k.c, k.x, t); };
        const double total = numerics::integrate(f, 0.0, 1.0, 1e-12).value + numerics::integrate_to_infinity(f, 1.0, 1e-12).value;
        const double expected = k.b > k.c ? std::exp(-2.0 * (k.a - k.x) * (k.b - k.c)) : 1.0;
        EXPECT_NEAR(bm_linear_total_crossing(k.a, k.b, k.c, k.x), expected, 1e-14);
        EXPECT_NEAR(total, expected, 1e-7);
    }
}

TEST(BmLinear, CrossingProbabilityClosedForm) {
    EXPECT_NEAR(bm_linear_crossing_probability(1.0, 0.0, 0.0, 0.0, 1.0), 2.0 * (1.0 - normal_cdf(1.0)), 1e-15);
    EXPECT_NEAR(bm_linear_crossing_probability(1.0, 1.0, 0.0, 0.0, 1.0),
                (1.0 - normal_cdf(2.0)) + std::exp(-2.0) * (1.0 - normal_cdf(0.0)), 1e-14);
}

TEST(BridgeNoCross, Limits) {
    for (double t : {0.01, 0.5, 2.0}) {
        const double d = 3.0 * std::sqrt(t);
        EXPECT_NEAR(brownian_bridge_no_cross(1.0 - d, 1.0 - d, t, 1.0, 0.0), -std::expm1(-18.0), 1e-15);
    }
    EXPECT_NEAR(brownian_bridge_no_cross(0.0, 1.0 - 1e-12, 1e-3, 1.0, 0.0), 0.0, 1e-8);
    // sloped line: distances at both ends
    EXPECT_NEAR(brownian_bridge_no_cross(0.0, 0.5, 1.0, 1.0, 0.2), -std::expm1(-2.0 * 1.0 * 0.7 / 1.0), 1e-15);
}

TEST(BandSurvival, MatchesAlternatingSeries) {
    // P(|W_s| < 1 for s <= 1) from the eigenfunction series
    double s = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double m = 2 * k + 1;
        s += 4.0 / (M_PI * m) * std::pow(-1.0, k) * std::exp(-m * m * M_PI * M_PI / 8.0);
    }
    EXPECT_NEAR(bm_band_survival(1.0, 1.0), s, 1e-14);
}
