#include <gtest/gtest.h>

#include <cmath>

#include "fptb/closed_forms.hpp"
#include "fptb/fpt_density.hpp"
#include "fptb/numerics/normal.hpp"

using namespace fptb;
using numerics::normal_pdf;

namespace {

const auto kBM = ReferenceProcess::brownian();

Boundary constant(double c, Side side = Side::Upper) {
    return Boundary::certified([c](double) { return c; }, side, [](double) { return 0.0; });
}

Boundary linear(double a, double b, Side side = Side::Upper) {
    return Boundary::certified([a, b](double t) { return a + b * t; }, side, [b](double) { return b; });
}

const DanielsParams kDaniels{0.5, 0.5, 0.5};

}  // namespace

TEST(UpperBoundB, LevelIsSharp) {
    const auto r = upper_bound_B(DiffusionModel::brownian(0.0), kBM, constant(1.0), 1.0);
    ASSERT_TRUE(r.B.present());
    EXPECT_NEAR(*r.B.value, normal_pdf(1.0), 1e-15);
}

TEST(UpperBoundB, LinearBoundaryClampedConstants) {
    // K^- = 0, K^+ = 1: B = (1.5 / 0.5) q(0.5, 0, 1.5), above the exact density
    const auto r = upper_bound_B(DiffusionModel::brownian(0.0), kBM, linear(1.0, 1.0), 0.5);
    EXPECT_NEAR(*r.B.value, 3.0 * normal_pdf(1.5 / std::sqrt(0.5)) / std::sqrt(0.5), 1e-14);
    EXPECT_GT(*r.B.value, bm_linear_fpt_density(1.0, 1.0, 0.0, 0.0, 0.5));
}

TEST(UpperBoundB, LinearBoundaryIsSharpWithSignedConstants) {
    const auto g = Boundary::with_constants([](double t) { return 1.0 + t; }, Side::Upper, {-1.0, 1.0});
    const auto r = upper_bound_B(DiffusionModel::brownian(0.0), kBM, g, 0.5);
    EXPECT_NEAR(*r.B.value, bm_linear_fpt_density(1.0, 1.0, 0.0, 0.0, 0.5), 1e-14);
    EXPECT_NEAR(*r.B.value, 1.0 / std::pow(0.5, 1.5) * normal_pdf(1.5 / std::sqrt(0.5)), 1e-14);
}

TEST(UpperBoundB, DriftedLinearIsSharp) {
    const auto model = DiffusionModel::brownian(0.2, -0.4);
    for (double b : {-0.7, 0.0, 0.3}) {
        const auto g = Boundary::with_constants([b](double t) { return 1.5 + b * t; }, Side::Upper, {-b, b});
        for (double t : {0.1, 0.5, 1.0}) {
            EXPECT_NEAR(*upper_bound_B(model, kBM, g, t).B.value / bm_linear_fpt_density(1.5, b, -0.4, 0.2, t), 1.0,
                        1e-10);
            EXPECT_NEAR(*lower_bound_B_star(model, kBM, g, t).B_star.value / bm_linear_fpt_density(1.5, b, -0.4, 0.2, t),
                        1.0, 1e-10);
        }
    }
}

TEST(UpperBoundB, DominatesOrnsteinUhlenbeckDensity) {
    const OUParams p{};
    const auto model = DiffusionModel::ornstein_uhlenbeck(p.theta, p.mu, p.x);
    const auto g = ou_hyperbolic(p);
    for (double t : {0.05, 0.25, 0.5, 0.75, 1.0}) {
        EXPECT_GE(*upper_bound_B(model, kBM, g, t).B.value, ou_hyperbolic_fpt_density(p, t)) << "t = " << t;
    }
}

TEST(LowerBoundBStar, CoincidesForLevel) {
    const auto r = lower_bound_B_star(DiffusionModel::brownian(0.0), kBM, constant(1.0), 1.0);
    ASSERT_TRUE(r.B_star.present());
    EXPECT_NEAR(*r.B_star.value, normal_pdf(1.0), 1e-15);
}

TEST(LowerBoundBStar, AbsentForOrnsteinUhlenbeck) {
    const OUParams p{};
    const auto model = DiffusionModel::ornstein_uhlenbeck(p.theta, p.mu, p.x);
    const auto r = lower_bound_B_star(model, kBM, ou_hyperbolic(p), 0.5);
    EXPECT_FALSE(r.B_star.present());
    EXPECT_EQ(r.B_star.reason, "M* unbounded");
}

TEST(LowerBoundBStar, BracketsDanielsDensity) {
    const auto r = density_bounds(DiffusionModel::brownian(0.0), kBM, daniels(kDaniels), 0.8);
    const double p = daniels_fpt_density(kDaniels, 0.0, 0.8);
    ASSERT_TRUE(r.B_star.present());
    EXPECT_LE(*r.B_star.value, p);
    EXPECT_GE(*r.B.value, p);
}

TEST(LowerBoundBStar, PreconditionGuard) {
    // x < min(g(t) - K^+ t) fails for a steep convex boundary
    const auto g = Boundary::certified([](double t) { return 0.5 + 2 * t * t; }, Side::Upper, [](double t) { return 4 * t; });
    const auto r = lower_bound_B_star(DiffusionModel::brownian(0.0), kBM, g, 1.0);
    EXPECT_FALSE(r.B_star.present());
    EXPECT_NE(r.B_star.reason.find("precondition"), std::string::npos);
}

TEST(LowerBoundary, ReflectionSymmetry) {
    const auto r = lower_boundary_bounds(DiffusionModel::brownian(0.0), kBM, constant(-1.0, Side::Lower), 1.0);
    EXPECT_NEAR(*r.C.value, normal_pdf(1.0), 1e-15);
    EXPECT_NEAR(*r.C_star.value, normal_pdf(1.0), 1e-15);
}

TEST(LowerBoundary, DriftedLevelIsSharp) {
    const auto r = lower_boundary_bounds(DiffusionModel::brownian(0.0, 0.3), kBM, constant(-1.0, Side::Lower), 0.7);
    EXPECT_NEAR(*r.C.value / bm_linear_fpt_density(1.0, 0.0, -0.3, 0.0, 0.7), 1.0, 1e-10);
}

TEST(LowerBoundary, PreconditionGuard) {
    const auto g = Boundary::certified([](double t) { return -0.5 - 2 * t * t; }, Side::Lower, [](double t) { return -4 * t; });
    const auto r = lower_boundary_bounds(DiffusionModel::brownian(0.0), kBM, g, 1.0);
    EXPECT_FALSE(r.C_star.present());
    EXPECT_FALSE(r.C_star.reason.empty());
}

TEST(ReflectionCoherence, LowerMatchesReflectedUpper) {
    const auto model = DiffusionModel::ornstein_uhlenbeck(0.7, 0.3, 0.1);
    const auto g = Boundary::certified([](double t) { return -1.0 - 0.4 * std::sin(3 * t); }, Side::Lower);
    for (double t : {0.2, 0.6, 1.0}) {
        const auto lo = lower_boundary_bounds(model, kBM, g, t);
        const auto up = upper_boundary_bounds(model.reflected(), kBM, g.negated(), t);
        EXPECT_DOUBLE_EQ(*lo.C.value, *up.B.value);
        EXPECT_EQ(lo.C_star.present(), up.B_star.present());
        if (lo.C_star.present()) {
            EXPECT_DOUBLE_EQ(*lo.C_star.value, *up.B_star.value);
        }
    }
}

TEST(Dominance, LowerNeverExceedsUpper) {
    const auto models = {DiffusionModel::brownian(0.0, 0.5), DiffusionModel::ornstein_uhlenbeck(0.3, 0.0, -0.2),
                         DiffusionModel::brownian(-0.3, -1.0)};
    const auto g = Boundary::certified([](double t) { return 1.0 + 0.3 * t - 0.2 * t * t; }, Side::Upper);
    for (const auto& m : models) {
        for (const auto& r : bound_curve(m, kBM, g, default_time_grid(0.0, 0.05))) {
            if (r.B_star.present()) {
                EXPECT_LE(*r.B_star.value, *r.B.value * (1 + 1e-12)) << "t = " << r.t;
            }
        }
    }
}

TEST(DimensionChoice, BesselSelfReference) {
    const auto model = DiffusionModel::bessel(4, 0.5);
    const auto g = constant(1.0);
    const auto choice = optimize_dimension(model, g, default_time_grid(0.0, 0.01));
    bool has_four = false;
    for (const auto& c : choice.candidates) has_four = has_four || c.dimension == 4;
    EXPECT_TRUE(has_four);
    EXPECT_EQ(choice.d_best, 4);
    // with d = 4 the drift correction vanishes and G cancels
    const auto r = upper_bound_B(model, ReferenceProcess::bessel(4), g, 0.5);
    EXPECT_NEAR(r.audit.delta_G, 0.0, 1e-12);
    EXPECT_NEAR(r.audit.functional, 0.0, 1e-9);
    const auto again = optimize_dimension(model, g, default_time_grid(0.0, 0.01));
    EXPECT_EQ(again.d_best, choice.d_best);
    EXPECT_NE(choice.candidates[0].sup_bound, choice.candidates[1].sup_bound);
}

TEST(SupOverTail, Examples) {
    std::vector<BoundReport> flat;
    for (double t : default_time_grid(0.0, 0.1)) {
        BoundReport r;
        r.t = t;
        r.B.value = 0.7;
        flat.push_back(r);
    }
    EXPECT_DOUBLE_EQ(sup_bound_over_tail(flat, 0.3), 0.7);

    const auto reports = bound_curve(DiffusionModel::brownian(0.0), kBM, constant(1.0), default_time_grid(0.0, 1e-3));
    const double sup = sup_bound_over_tail(reports, 0.0);
    EXPECT_GE(sup, 0.46254098941130783);
    EXPECT_NEAR(sup, 0.46254098941130783, 1e-3);
    const double tail = sup_bound_over_tail(reports, 0.999);
    EXPECT_GE(tail, *reports.back().B.value);
    EXPECT_NEAR(tail, *reports.back().B.value, 1e-3);
}

TEST(TimeGrid, Layout) {
    const auto grid = default_time_grid(0.0, 0.1);
    EXPECT_DOUBLE_EQ(grid.front(), 1e-4);
    EXPECT_DOUBLE_EQ(grid.back(), 1.0);
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LT(grid[i - 1], grid[i]);
}
