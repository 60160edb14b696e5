#include <gtest/gtest.h>

#include <cmath>

#include "fptb/closed_forms.hpp"
#include "fptb/crossing_error.hpp"
#include "fptb/errors.hpp"

using namespace fptb;

namespace {

const auto kBM = ReferenceProcess::brownian();
const DanielsParams kDaniels{0.5, 0.5, 0.5};

Boundary constant(double c, Side side = Side::Upper) {
    return Boundary::certified([c](double) { return c; }, side, [](double) { return 0.0; });
}

}  // namespace

TEST(DriftEnvelope, ZeroDrift) {
    const auto g = Boundary::with_constants([](double t) { return 1.0 + 0.2 * t; }, Side::Upper, {0.1, 0.2});
    const auto env = drift_envelope(DiffusionModel::brownian(0.0), g, 0.05);
    EXPECT_EQ(env.mu_lower, 0.0);
    EXPECT_EQ(env.mu_upper, 0.0);
    EXPECT_DOUBLE_EQ(env.K_star, 0.2);
    EXPECT_DOUBLE_EQ(env.K_hat, 0.1);
}

TEST(DriftEnvelope, LinearDriftUsesWindowEndpoints) {
    const auto model = DiffusionModel::ornstein_uhlenbeck(0.5, 2.0, 0.0);
    const auto g = Boundary::with_constants([](double t) { return 1.0 + 0.2 * t; }, Side::Upper, {0.1, 0.2});
    const double eps = 0.05;
    const auto env = drift_envelope(model, g, eps);
    const double top = 1.0 + 0.2 + eps, bottom = 1.0 - 0.1 - eps;
    EXPECT_NEAR(env.mu_lower, -0.5 * (top - 2.0), 1e-8);
    EXPECT_NEAR(env.mu_upper, -0.5 * (bottom - 2.0), 1e-8);
    EXPECT_NEAR(env.K_star, std::max(0.0, 0.2 - env.mu_lower), 1e-12);
}

TEST(DriftEnvelope, BesselDriftOnHalfLine) {
    const auto model = DiffusionModel::bessel(4, 0.5);
    const auto env = drift_envelope(model, constant(1.0), 0.05);
    EXPECT_TRUE(env.lower_finite);
    EXPECT_NEAR(env.mu_lower, 3.0 / (2.0 * 1.05), 1e-8);
}

TEST(DEps, LowerMirrorsUpper) {
    const auto bm = DiffusionModel::brownian(0.0);
    const double lower = d_eps_lower(bm, constant(-1.0, Side::Lower), 0.05, 0.3, 0.4);
    const double upper = d_eps_upper(bm.reflected(), constant(1.0), 0.05, 0.3, 0.4);
    EXPECT_DOUBLE_EQ(lower, upper);
}

TEST(DEps, UnboundedDriftIsInapplicable) {
    const DiffusionModel quad([](double y) { return y * y; }, [](double y) { return 2 * y; }, DiffusionInterval::A, 0.0);
    EXPECT_THROW(d_eps_lower(quad, constant(-1.0, Side::Lower), 0.05, 0.3, 0.4), InapplicableError);
}

TEST(DEps, OrnsteinUhlenbeckLowerBoundaryIsFinite) {
    const auto model = DiffusionModel::ornstein_uhlenbeck(0.5, 2.0, 1.0);
    const double eps = 0.05;
    const auto env = drift_envelope(model, constant(0.0, Side::Lower), eps);
    ASSERT_TRUE(env.upper_finite);
    EXPECT_NEAR(env.mu_upper, -0.5 * (0.0 - 0.0 - eps - 2.0), 1e-8);
    EXPECT_TRUE(std::isfinite(d_eps_lower(model, constant(0.0, Side::Lower), eps, 0.3, 0.5)));
}

TEST(DEps, Formula) {
    EXPECT_NEAR(d_eps_formula(0.1, 0.0, 0.5, 0.0), std::sqrt(2.0 / M_PI) * 2.0 * 0.1, 1e-15);
    EXPECT_EQ(d_eps_formula(0.0, 0.5, 10.0, 3.0), 0.0);
    EXPECT_THROW(d_eps_formula(0.1, 1.0, 0.5, 0.0), DomainError);
}

TEST(Certify, DanielsCoefficient) {
    const auto c = certify(DiffusionModel::brownian(0.0), kBM, daniels(kDaniels), 0.05);
    EXPECT_NEAR(c.coefficient(), 3.05, 0.02);
    EXPECT_NEAR(c.t0, 0.555, 0.005);
    EXPECT_NEAR(c.total, 3.05 * 0.05, 0.001);
    EXPECT_EQ(c.side, CertificateSide::OneSidedUpper);
    EXPECT_GE(c.total, c.at_g.total);
    EXPECT_GE(c.total, c.at_g_minus_eps.total);
}

TEST(Certify, FlatDanielsCoefficient) {
    const auto c = certify(DiffusionModel::brownian(0.0), kBM, daniels({1.0, 0.9, 0.9}), 0.05);
    EXPECT_NEAR(c.coefficient(), 1.7, 0.02);
}

TEST(Certify, BesselCoefficient) {
    const auto c = certify(DiffusionModel::bessel(4, 0.5), ReferenceProcess::bessel(4), constant(1.0), 0.05);
    EXPECT_NEAR(c.coefficient(), 2.25, 0.02);
    EXPECT_NEAR(c.t0, 0.75, 0.01);
}

TEST(Certify, FixedT0IsHonoured) {
    CertifyOptions opts;
    opts.t0 = 0.2;
    const auto fixed = certify(DiffusionModel::brownian(0.0), kBM, daniels(kDaniels), 0.05, std::nullopt, opts);
    const auto best = certify(DiffusionModel::brownian(0.0), kBM, daniels(kDaniels), 0.05);
    EXPECT_DOUBLE_EQ(fixed.t0, 0.2);
    EXPECT_GE(fixed.total, best.total);
}

TEST(Certify, IdenticalBoundariesGiveZero) {
    const auto g = daniels(kDaniels);
    const auto c = certify(DiffusionModel::brownian(0.0), kBM, g, g, std::nullopt, std::nullopt);
    EXPECT_EQ(c.eps, 0.0);
    EXPECT_EQ(c.total, 0.0);
}

TEST(Certify, TwoSidedBand) {
    const auto c = certify(DiffusionModel::brownian(0.0), kBM, constant(1.0), 0.02, constant(-1.0, Side::Lower));
    EXPECT_EQ(c.side, CertificateSide::TwoSided);
    ASSERT_TRUE(c.D_eps_minus.has_value());
    // symmetric band: both sides contribute equally
    EXPECT_NEAR(*c.D_eps_minus, c.D_eps, 1e-12);
    EXPECT_NEAR(c.total, 2.0 * c.D_eps, 1e-12);
}

TEST(SimpleBound, Examples) {
    const auto bm = DiffusionModel::brownian(0.0);
    EXPECT_NEAR(simple_bound(bm, kBM, constant(1.0), 1.0), 4.0 * std::sqrt(0.46254098941130783 / M_PI), 2e-3);
    const double simple = simple_bound(bm, kBM, daniels(kDaniels), 0.05);
    EXPECT_GE(simple / 0.05, 3.05);
}

TEST(PiecewiseLinearCertificate, QuadraticDecay) {
    const auto bm = DiffusionModel::brownian(0.0);
    const auto g = daniels(kDaniels);
    double prev = 0.0;
    for (int n : {4, 8, 16}) {
        const auto c = piecewise_linear_certificate(bm, kBM, g, n);
        if (prev > 0.0) {
            EXPECT_GE(c.certificate.total / prev, 0.24) << "n = " << n;
            EXPECT_LE(c.certificate.total / prev, 0.26) << "n = " << n;
        }
        prev = c.certificate.total;
    }
}

TEST(PiecewiseLinearCertificate, LinearBoundaryIsExact) {
    const auto g = Boundary::certified([](double t) { return 1.0 + 0.5 * t; }, Side::Upper, [](double) { return 0.5; });
    const auto c = piecewise_linear_certificate(DiffusionModel::brownian(0.0), kBM, g, 4, 0.0);
    EXPECT_EQ(c.certificate.total, 0.0);
}

TEST(PiecewiseLinearCertificate, DanielsCurvatureFromGrid) {
    const auto g = daniels(kDaniels);
    const auto c = piecewise_linear_certificate(DiffusionModel::brownian(0.0), kBM, g, 16);
    double xi = 0.0;
    const int n = 100000;
    const double h = 1.0 / n;
    for (int i = 1; i < n; ++i) {
        const double t = i * h;
        xi = std::max(xi, std::abs(daniels_boundary(kDaniels, t + h) - 2 * daniels_boundary(kDaniels, t) +
                                   daniels_boundary(kDaniels, t - h)) / (h * h));
    }
    EXPECT_GE(c.xi, xi * (1 - 1e-3));
    EXPECT_NEAR(c.certificate.eps, c.xi / 2048.0, 1e-15);
    EXPECT_GE(c.certificate.eps, c.approximation.eps);
}
