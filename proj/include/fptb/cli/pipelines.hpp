#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/cli/scenario.hpp"
#include "fptb/crossing_error.hpp"
#include "fptb/diffusion.hpp"
#include "fptb/fpt_density.hpp"
#include "fptb/mc_oracle.hpp"

namespace fptb::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitInapplicable = 2,
    kExitValidationFailed = 3,
    kExitParseError = 4,
};

/// Command-line overrides applied on top of a scenario.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<double> step;
    /// "auto" or a number.
    std::optional<std::string> t0;
    /// "auto" or an integer dimension.
    std::optional<std::string> d;
    std::optional<bool> mc;
};

void apply_overrides(Scenario& s, const Overrides& o);

/// A scenario turned into model objects. Boundaries live in the coordinates
/// of the unit-diffusion process.
struct Problem {
    DiffusionModel model;
    std::optional<Boundary> upper;
    std::optional<Boundary> lower;
    std::optional<Boundary> approx_upper;
    std::optional<Boundary> approx_lower;
    /// Declared or certified sup distance between boundaries and approximations.
    std::optional<double> eps;
    RealFn closed_form_upper;
    RealFn closed_form_lower;
    std::string closed_form_name;
};

Problem build_problem(const Scenario& s);

struct ReferenceChoice {
    ReferenceProcess ref = ReferenceProcess::brownian();
    /// Per-dimension sup of B when the dimension was optimised.
    std::vector<std::pair<int, double>> candidates;
};

ReferenceChoice choose_reference(const Scenario& s, const Problem& p);

SimConfig sim_config(const McSection& mc);

struct BoundaryCurve {
    Side side = Side::Upper;
    std::vector<BoundReport> reports;
    std::vector<double> g;
    std::vector<double> closed_form;  // empty without a closed form
    std::optional<FptHistogram> histogram;
    double sup_upper = 0.0;
    std::optional<double> sup_lower;
    std::string lower_reason;  // first reason the lower bound was absent
    std::optional<double> max_rel_error;
};

struct FptResult {
    std::string name;
    int dimension = 0;  // 0 for a Brownian reference
    std::vector<std::pair<int, double>> dimension_candidates;
    std::vector<BoundaryCurve> curves;
    std::vector<std::string> files;
    std::string summary_json;
};

/// Density bounds on the time grid. `out` is a directory, a .csv path, or
/// empty for no files.
FptResult run_fpt_bounds(const Scenario& s, const std::string& out);

struct BcpResult {
    std::string name;
    int dimension = 0;
    CrossingErrorCertificate certificate;
    std::vector<std::string> files;
    std::string summary_json;
};

/// Theorem-level crossing-probability certificate. Throws InapplicableError
/// with the reason when the hypotheses fail.
BcpResult run_bcp_certificate(const Scenario& s, const std::string& out);

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidateOptions {
    /// Multiplies the upper density bound in the histogram check; values
    /// below 1 serve as a negative control.
    double bound_scale = 1.0;
};

struct ValidateResult {
    std::string name;
    std::vector<Check> checks;
    std::vector<std::string> files;
    std::string summary_json;

    bool passed() const;
};

/// Monte Carlo and closed-form checks of the bounds and of the certificate.
ValidateResult run_validate(const Scenario& s, const std::string& out, const ValidateOptions& options = {});

struct ReproduceResult {
    std::string name;
    FptResult fpt;
    std::optional<BcpResult> bcp;
    std::optional<ValidateResult> validation;
    std::vector<Check> checks;
    std::string summary_json;

    bool passed() const;
};

std::vector<std::string> builtin_scenario_names();
/// Text of a built-in scenario; throws ParseError for unknown names.
std::string builtin_scenario_text(const std::string& name);

/// Runs a built-in scenario end to end and checks its reference values.
ReproduceResult reproduce(const std::string& name, const std::string& out, const Overrides& overrides = {});

/// Closed-form dominance checks: upper bound >= exact density and lower
/// bound <= exact density on the grid.
std::vector<Check> closed_form_checks(const FptResult& fpt);

std::string format_fpt_report(const FptResult& r);
std::string format_bcp_report(const BcpResult& r);
std::string format_checks(const std::vector<Check>& checks);

}  // namespace fptb::cli
