#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fptb::cli {

struct DiffusionSection {
    /// bm | ou | bessel | gbm | custom | unit_drift
    std::string kind = "bm";
    double drift = 0.0;      // bm
    double theta = 0.5;      // ou
    double mean = 0.0;       // ou
    int dimension = 3;       // bessel
    double nu = 0.0;         // gbm
    double sigma = 1.0;      // gbm
    std::string nu_expr;     // custom, in y
    std::string sigma_expr;  // custom, in y
    std::string mu_expr;     // unit_drift, in y
    /// auto | A | B
    std::string interval = "auto";
    double x = 0.0;

    bool operator==(const DiffusionSection&) const = default;
};

struct BoundarySection {
    /// upper | lower
    std::string side = "upper";
    /// daniels | hyperbolic_ou | linear | constant | expr
    std::string kind = "constant";
    double delta = 0.5;
    double kappa1 = 0.5;
    double kappa2 = 0.5;
    double A = 0.0;
    double B = 0.0;
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
    std::string expr;  // in t
    /// auto | given
    std::string lipschitz = "auto";
    double k_minus = 0.0;
    double k_plus = 0.0;

    bool operator==(const BoundarySection&) const = default;
};

struct ApproximationSection {
    /// none | eps | piecewise_linear | expr
    std::string type = "none";
    int n = 4;
    std::string expr;        // upper approximation, in t
    std::string lower_expr;  // lower approximation, in t
    /// Empty means measured ("auto").
    std::optional<double> eps;
    /// Curvature bound for piecewise-linear approximations.
    std::optional<double> xi;

    bool operator==(const ApproximationSection&) const = default;
};

struct ReferenceSection {
    /// auto | bm | bessel
    std::string kind = "auto";
    /// Bessel dimension; empty selects it by optimisation.
    std::optional<int> dimension;
    int d_max = 13;

    bool operator==(const ReferenceSection&) const = default;
};

struct RunSection {
    /// Empty means optimised ("auto").
    std::optional<double> t0;
    double t_step = 1e-3;

    bool operator==(const RunSection&) const = default;
};

struct McSection {
    bool enabled = false;
    std::int64_t paths = 100000;
    double step = 1e-3;
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    int bins = 40;
    double budget = 2e10;

    bool operator==(const McSection&) const = default;
};

/// Reference values checked by `reproduce`.
struct ExpectSection {
    std::optional<double> coefficient;
    double coefficient_tol = 0.02;
    std::optional<double> t0;
    double t0_tol = 0.01;
    std::optional<double> max_rel_error;
    /// Relative-error grid: points where the exact density is at least this
    /// fraction of its peak.
    double density_floor = 0.01;
    std::optional<std::string> b_star_reason;

    bool operator==(const ExpectSection&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::string description;
    DiffusionSection diffusion;
    std::vector<BoundarySection> boundaries;
    ApproximationSection approximation;
    ReferenceSection reference;
    RunSection run;
    McSection mc;
    ExpectSection expect;

    bool operator==(const Scenario&) const = default;
};

/// Parses and validates TOML-style scenario text. Throws ParseError with
/// line and column for malformed input, unknown keys, bad expressions and
/// violated parameter constraints.
Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

}  // namespace fptb::cli
