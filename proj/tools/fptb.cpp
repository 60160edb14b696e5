#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fptb/cli/pipelines.hpp"
#include "fptb/errors.hpp"

namespace {

using namespace fptb;
using namespace fptb::cli;

struct Options {
    std::string scenario;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<double> step;
    std::optional<std::string> t0;
    std::optional<std::string> d;
    bool no_mc = false;
};

// A scenario argument is a file path, or the name of a built-in scenario.
Scenario load(const Options& o) {
    if (std::filesystem::exists(o.scenario)) return load_scenario_file(o.scenario);
    return parse_scenario(builtin_scenario_text(o.scenario));
}

Overrides overrides(const Options& o) {
    Overrides ov;
    ov.seed = o.seed;
    ov.paths = o.paths;
    ov.step = o.step;
    ov.t0 = o.t0;
    ov.d = o.d;
    if (o.no_mc) ov.mc = false;
    return ov;
}

void add_common(CLI::App* cmd, Options& o, bool scenario_required) {
    auto* s = cmd->add_option("--scenario,-s", o.scenario, "scenario file or built-in name");
    if (scenario_required) s->required();
    cmd->add_option("--out,-o", o.out, "output directory or .csv path");
    cmd->add_option("--seed", o.seed, "Monte Carlo seed");
    cmd->add_option("--paths", o.paths, "Monte Carlo paths");
    cmd->add_option("--step", o.step, "Monte Carlo time step");
    cmd->add_option("--t0", o.t0, "split point t0: auto or a value in [0, 1)");
    cmd->add_option("--d", o.d, "Bessel reference dimension: auto or an integer >= 3");
    cmd->add_flag("--no-mc", o.no_mc, "skip Monte Carlo simulation");
}

int run(CLI::App& app, const Options& o, CLI::App* fpt, CLI::App* bcp, CLI::App* validate, CLI::App* repro) {
    if (*repro) {
        const ReproduceResult r = reproduce(o.scenario, o.out, overrides(o));
        std::cout << format_fpt_report(r.fpt);
        if (r.bcp) std::cout << format_bcp_report(*r.bcp);
        std::cout << format_checks(r.checks);
        return r.passed() ? kExitOk : kExitValidationFailed;
    }
    Scenario s = load(o);
    apply_overrides(s, overrides(o));
    if (*fpt) {
        std::cout << format_fpt_report(run_fpt_bounds(s, o.out));
        return kExitOk;
    }
    if (*bcp) {
        const BcpResult r = run_bcp_certificate(s, o.out);
        std::cout << format_bcp_report(r);
        if (!r.certificate.applicable) return kExitInapplicable;
        return kExitOk;
    }
    if (*validate) {
        const ValidateResult r = run_validate(s, o.out);
        std::cout << format_checks(r.checks);
        return r.passed() ? kExitOk : kExitValidationFailed;
    }
    std::cout << app.help();
    return kExitError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified first-passage-time density bounds and boundary crossing error certificates"};
    app.require_subcommand(1);
    Options o;
    auto* fpt = app.add_subcommand("fpt", "first-passage-time density bounds on a time grid");
    auto* bcp = app.add_subcommand("bcp", "crossing probability error certificate");
    auto* validate = app.add_subcommand("validate", "Monte Carlo validation of the bounds");
    auto* repro = app.add_subcommand("reproduce", "run a built-in scenario end to end");
    add_common(fpt, o, true);
    add_common(bcp, o, true);
    add_common(validate, o, true);
    add_common(repro, o, false);
    repro->add_option("name", o.scenario, "built-in scenario name")->check([](const std::string& n) {
        for (const auto& b : builtin_scenario_names()) {
            if (b == n) return std::string();
        }
        return "unknown built-in scenario '" + n + "'";
    });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParseError;
    }
    if (*repro && o.scenario.empty()) {
        std::cerr << "reproduce needs a scenario name\n";
        return kExitParseError;
    }
    try {
        return run(app, o, fpt, bcp, validate, repro);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParseError;
    } catch (const InapplicableError& e) {
        std::cerr << "inapplicable: " << e.what() << "\n";
        return kExitInapplicable;
    } catch (const BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
