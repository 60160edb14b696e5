#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fptb/cli/expr.hpp"
#include "fptb/cli/pipelines.hpp"
#include "fptb/cli/scenario.hpp"
#include "fptb/errors.hpp"

using namespace fptb;
using namespace fptb::cli;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fptb_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kMinimal = R"toml(
name = "level"

[diffusion]
kind = "bm"

[[boundary]]
side = "upper"
kind = "constant"
c = 1.0
)toml";

Scenario with_mc(Scenario s, std::int64_t paths) {
    s.mc.enabled = true;
    s.mc.paths = paths;
    return s;
}

}  // namespace

TEST(Expr, DualNumbers) {
    EXPECT_EQ(eval_expr_with_derivative(Expr::parse("y^2", "y"), 3.0), std::make_pair(9.0, 6.0));
    const auto [v, d] = eval_expr_with_derivative(Expr::parse("exp(-0.5*y)", "y"), 0.0);
    EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_DOUBLE_EQ(d, -0.5);
}

TEST(Expr, DanielsExpressionMatchesFiniteDifference) {
    const auto e = Expr::parse("t/(2*0.5)*log(0.25 + sqrt(0.0625 + 0.5*exp(-1/t)))", "t");
    const double h = 1e-6;
    const double fd = (e(0.5 + h) - e(0.5 - h)) / (2 * h);
    EXPECT_NEAR(e.eval_dual(0.5).derivative, fd, 1e-6);
    EXPECT_NEAR(e.derivative()(0.5), e.eval_dual(0.5).derivative, 1e-14);
}

TEST(Expr, SymbolicDerivativesMatchFiniteDifferences) {
    // Expression forms of the built-in boundaries and drifts.
    const std::vector<std::pair<std::string, std::string>> exprs = {
        {"0.5 - t/(2*0.5)*log(0.25 + sqrt(0.0625 + 0.5*exp(-1/t)))", "t"},
        {"1.0 - t/(2*1.0)*log(0.45 + sqrt(0.2025 + 0.9*exp(-4/t)))", "t"},
        {"2 + exp(-0.5*t) - exp(0.5*t)", "t"},
        {"-0.5*(y-2)", "y"},
        {"3/(2*y)", "y"},
        {"sin(y)^2 + cos(3*y)/sqrt(1 + y^2)", "y"},
    };
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (const auto& [text, var] : exprs) {
        const auto e = Expr::parse(text, var);
        const auto de = e.derivative();
        for (int i = 0; i < 100; ++i) {
            const double x = u(rng);
            const double h = 1e-6;
            const double fd = (e(x + h) - e(x - h)) / (2 * h);
            EXPECT_NEAR(de(x), fd, 1e-6 * std::max(1.0, std::abs(fd))) << text << " at " << x;
            EXPECT_NEAR(e.eval_dual(x).derivative, de(x), 1e-12 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Expr, ParseErrorsCarryPosition) {
    try {
        Expr::parse("1 + * y", "y", 3, 10);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 14);
    }
    EXPECT_THROW(Expr::parse("foo(y)", "y"), ParseError);
    EXPECT_THROW(Expr::parse("t + 1", "y"), ParseError);
    EXPECT_THROW(Expr::parse("log(y)", "y").eval_dual(-1.0), DomainError);
}

TEST(Expr, PowerAndPrecedence) {
    EXPECT_DOUBLE_EQ(Expr::parse("2^3^2", "y")(0.0), 512.0);
    EXPECT_DOUBLE_EQ(Expr::parse("-y^2", "y")(3.0), -9.0);
    EXPECT_DOUBLE_EQ(Expr::parse("pi", "y")(0.0), M_PI);
    EXPECT_DOUBLE_EQ(Expr::parse("y^-1", "y").derivative()(2.0), -0.25);
}

TEST(Scenario, MinimalDefaults) {
    const Scenario s = parse_scenario(kMinimal);
    EXPECT_EQ(s.name, "level");
    EXPECT_EQ(s.diffusion.kind, "bm");
    EXPECT_EQ(s.diffusion.x, 0.0);
    ASSERT_EQ(s.boundaries.size(), 1u);
    EXPECT_EQ(s.boundaries[0].lipschitz, "auto");
    EXPECT_EQ(s.approximation.type, "none");
    EXPECT_FALSE(s.run.t0.has_value());
    EXPECT_FALSE(s.mc.enabled);
}

TEST(Scenario, UnitDriftExpression) {
    const Scenario s = parse_scenario(R"toml(
[diffusion]
kind = "unit_drift"
mu_expr = "-0.5*(y-2)"
x = 0.0

[[boundary]]
side = "upper"
kind = "constant"
c = 1.0
)toml");
    const Problem p = build_problem(s);
    EXPECT_DOUBLE_EQ(p.model.mu(1.0), 0.5);
    EXPECT_DOUBLE_EQ(p.model.mu_prime(1.0), -0.5);
}

TEST(Scenario, Rejections) {
    const std::string zero_sigma = R"toml(
[diffusion]
kind = "custom"
nu_expr = "0"
sigma_expr = "0"
x = 1.0
)toml";
    try {
        parse_scenario(zero_sigma);
        FAIL() << "expected rejection";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("σ must be positive"), std::string::npos);
        EXPECT_EQ(e.line(), 5);
    }
    const std::string bad_daniels = R"toml(
[diffusion]
kind = "bm"

[[boundary]]
kind = "daniels"
delta = 0.5
kappa1 = 0.5
kappa2 = -1.0
)toml";
    EXPECT_THROW(parse_scenario(bad_daniels), ParseError);
    EXPECT_THROW(parse_scenario("[diffusion]\nkind = \"bm\"\nspeed = 3\n"), ParseError);
    EXPECT_THROW(parse_scenario("[nonsense]\n"), ParseError);
    EXPECT_THROW(parse_scenario("[diffusion]\nkind = \"bm\"\n[[boundary]]\nkind = \"expr\"\nexpr = \"1 +\"\n"), ParseError);
}

TEST(Scenario, RoundTrip) {
    for (const auto& name : builtin_scenario_names()) {
        const Scenario s = parse_scenario(builtin_scenario_text(name));
        const std::string text = serialize_scenario(s);
        EXPECT_EQ(parse_scenario(text), s) << name;
        EXPECT_EQ(serialize_scenario(parse_scenario(text)), text) << name;
    }
    const Scenario m = parse_scenario(kMinimal);
    EXPECT_EQ(parse_scenario(serialize_scenario(m)), m);
}

TEST(Scenario, BuiltinsMatchShippedFiles) {
    for (const auto& name : builtin_scenario_names()) {
        const std::string path = std::string(FPTB_SOURCE_DIR) + "/scenarios/" + name + ".toml";
        EXPECT_EQ(load_scenario_file(path), parse_scenario(builtin_scenario_text(name))) << name;
    }
    EXPECT_THROW(builtin_scenario_text("missing"), ParseError);
}

TEST(Overrides, Apply) {
    Scenario s = parse_scenario(builtin_scenario_text("bessel4"));
    Overrides o;
    o.seed = 9;
    o.paths = 123;
    o.t0 = "0.4";
    o.d = "5";
    apply_overrides(s, o);
    EXPECT_EQ(s.mc.seed, 9u);
    EXPECT_EQ(s.mc.paths, 123);
    EXPECT_EQ(s.run.t0, 0.4);
    EXPECT_EQ(s.reference.dimension, 5);
    o = Overrides{};
    o.t0 = "auto";
    apply_overrides(s, o);
    EXPECT_FALSE(s.run.t0.has_value());
}

TEST(Pipelines, FptCsvLayoutAndStability) {
    const fs::path dir = scratch_dir("fpt");
    Scenario s = parse_scenario(builtin_scenario_text("daniels"));
    s.mc.enabled = false;
    const auto r1 = run_fpt_bounds(s, (dir / "fig1.csv").string());
    const std::string first = read_file((dir / "fig1_upper.csv").string());
    const auto r2 = run_fpt_bounds(s, (dir / "fig1.csv").string());
    EXPECT_EQ(read_file((dir / "fig1_upper.csv").string()), first);
    std::istringstream lines(first);
    std::string header, row;
    std::getline(lines, header);
    EXPECT_EQ(header, "t,g,B,B_star,closed_form,log10_bound,log10_closed_form,mc_density,mc_se,flags");
    std::getline(lines, row);
    EXPECT_EQ(row.substr(0, 7), "0.0001,");
    ASSERT_EQ(r1.curves.size(), 1u);
    EXPECT_TRUE(r1.curves[0].sup_lower.has_value());
    EXPECT_NE(r1.summary_json.find("\"sup_upper_bound\""), std::string::npos);
}

TEST(Pipelines, FptFlagsAbsentLowerBound) {
    Scenario s = parse_scenario(builtin_scenario_text("ou"));
    s.mc.enabled = false;
    const fs::path dir = scratch_dir("ou");
    const auto r = run_fpt_bounds(s, dir.string());
    EXPECT_FALSE(r.curves[0].sup_lower.has_value());
    EXPECT_EQ(r.curves[0].lower_reason, "M* unbounded");
    const std::string csv = read_file((dir / "ou_upper.csv").string());
    EXPECT_NE(csv.find("B_star absent: M* unbounded"), std::string::npos);
}

TEST(Pipelines, McColumnsAreReproducible) {
    Scenario s = with_mc(parse_scenario(builtin_scenario_text("bessel4")), 20000);
    const fs::path dir = scratch_dir("mc");
    run_fpt_bounds(s, (dir / "a").string());
    run_fpt_bounds(s, (dir / "b").string());
    EXPECT_EQ(read_file((dir / "a" / "bessel4_upper.csv").string()), read_file((dir / "b" / "bessel4_upper.csv").string()));
}

TEST(Pipelines, BcpCertificate) {
    const Scenario s = parse_scenario(builtin_scenario_text("daniels"));
    const auto r = run_bcp_certificate(s, scratch_dir("bcp").string());
    EXPECT_NEAR(r.certificate.coefficient(), 3.05, 0.02);
    EXPECT_NEAR(r.certificate.t0, 0.555, 0.005);
    EXPECT_NE(r.summary_json.find("\"coefficient\""), std::string::npos);
    EXPECT_NE(format_bcp_report(r).find("coefficient = 3.04"), std::string::npos);
    EXPECT_THROW(run_bcp_certificate(parse_scenario(kMinimal), ""), InapplicableError);
}

TEST(Pipelines, BcpPiecewiseLinearAndLowerOnly) {
    Scenario s = parse_scenario(builtin_scenario_text("daniels"));
    s.approximation.type = "piecewise_linear";
    s.approximation.n = 4;
    s.approximation.eps.reset();
    const auto r = run_bcp_certificate(s, "");
    EXPECT_GT(r.certificate.eps, 0.0);
    EXPECT_LT(r.certificate.eps, 0.02);

    const Scenario lower = parse_scenario(R"toml(
[diffusion]
kind = "bm"
[[boundary]]
side = "lower"
kind = "constant"
c = -1.0
[approximation]
type = "eps"
eps = 0.01
)toml");
    const Scenario upper = parse_scenario(R"toml(
[diffusion]
kind = "bm"
[[boundary]]
side = "upper"
kind = "constant"
c = 1.0
[approximation]
type = "eps"
eps = 0.01
)toml");
    EXPECT_NEAR(run_bcp_certificate(lower, "").certificate.total, run_bcp_certificate(upper, "").certificate.total, 1e-12);
}

TEST(Pipelines, ValidateDanielsPasses) {
    const Scenario s = with_mc(parse_scenario(builtin_scenario_text("daniels")), 100000);
    const auto r = run_validate(s, scratch_dir("validate").string());
    EXPECT_TRUE(r.passed()) << format_checks(r.checks);
    bool chi2 = false;
    for (const auto& c : r.checks) chi2 = chi2 || c.name.find("histogram matches exact density") == 0;
    EXPECT_TRUE(chi2);
}

TEST(Pipelines, ValidateBesselPasses) {
    const Scenario s = with_mc(parse_scenario(builtin_scenario_text("bessel4")), 100000);
    const auto r = run_validate(s, "");
    EXPECT_TRUE(r.passed()) << format_checks(r.checks);
}

TEST(Pipelines, CorruptedBoundFailsWithNamedBin) {
    const Scenario s = with_mc(parse_scenario(builtin_scenario_text("daniels")), 100000);
    ValidateOptions corrupt;
    corrupt.bound_scale = 0.5;
    const auto r = run_validate(s, "", corrupt);
    EXPECT_FALSE(r.passed());
    bool named = false;
    for (const auto& c : r.checks) {
        if (!c.passed) named = named || c.detail.rfind("bin ", 0) == 0;
    }
    EXPECT_TRUE(named) << format_checks(r.checks);
}

TEST(Pipelines, ValidateExplicitApproximation) {
    const Scenario s = with_mc(parse_scenario(R"toml(
[diffusion]
kind = "bm"
[[boundary]]
side = "upper"
kind = "daniels"
delta = 0.5
kappa1 = 0.5
kappa2 = 0.5
[approximation]
type = "expr"
expr = "0.5 + 0.29245751819388817*t"
)toml"), 50000);
    const auto r = run_validate(s, "");
    EXPECT_TRUE(r.passed()) << format_checks(r.checks);
    EXPECT_EQ(r.checks.back().name, "|P(g) - P(f)| <= certificate + 3 combined SE");
}

TEST(Pipelines, ReproduceReports) {
    Overrides o;
    o.mc = false;
    const auto daniels = reproduce("daniels", scratch_dir("repro").string(), o);
    EXPECT_TRUE(daniels.passed()) << format_checks(daniels.checks);
    ASSERT_TRUE(daniels.bcp.has_value());
    EXPECT_NEAR(daniels.bcp->certificate.coefficient(), 3.05, 0.02);

    const auto ou = reproduce("ou", "", o);
    bool reason = false;
    for (const auto& c : ou.checks) reason = reason || (c.name == "lower bound absent: M* unbounded" && c.passed);
    EXPECT_TRUE(reason) << format_checks(ou.checks);
    EXPECT_THROW(reproduce("nope", "", o), ParseError);
}

TEST(Pipelines, CustomAndGbmModels) {
    const Scenario gbm = parse_scenario(R"toml(
[diffusion]
kind = "gbm"
nu = 0.1
sigma = 0.2
x = 1.0
[[boundary]]
side = "upper"
kind = "constant"
c = 1.2214027581601699
)toml");
    // log(1.2214...) / 0.2 = 1: a drifted Brownian level crossing in unit coordinates
    const Problem p = build_problem(gbm);
    EXPECT_NEAR((*p.upper)(0.3), 1.0, 1e-12);
    EXPECT_NEAR(p.model.mu(0.0), 0.4, 1e-6);
    const auto r = run_fpt_bounds(gbm, "");
    EXPECT_GT(r.curves[0].sup_upper, 0.0);
}
