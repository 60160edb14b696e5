#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fptb/boundary.hpp"
#include "fptb/diffusion.hpp"

namespace fptb {

inline constexpr double kDefaultBudget = 2e10;

struct SimConfig {
    std::int64_t paths = 100000;
    double step = 1e-3;
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    double horizon = 1.0;
    /// Upper limit on paths * steps.
    double budget = kDefaultBudget;
    /// Worker threads; 0 uses the hardware concurrency.
    int threads = 0;

    void validate() const;
    /// Number of Euler steps; the step is shrunk so that they tile the horizon.
    std::int64_t steps() const;
    double effective_step() const;
};

struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t paths = 0;
    SimConfig config;
};

/// An upper boundary, a lower boundary, or both.
struct BoundarySet {
    std::optional<Boundary> upper;
    std::optional<Boundary> lower;

    static BoundarySet one(const Boundary& g);
    static BoundarySet band(const Boundary& upper, const Boundary& lower);
};

/// Probability of leaving the region between the boundaries by the horizon.
MCEstimate estimate_crossing_prob(const DiffusionModel& model, const BoundarySet& set, const SimConfig& cfg);
MCEstimate estimate_crossing_prob(const DiffusionModel& model, const Boundary& g, const SimConfig& cfg);

/// Several boundary sets evaluated on the same paths and uniforms.
struct JointEstimate {
    std::vector<MCEstimate> crossing;
    /// Standard error of the paired difference crossing[i] - crossing[j].
    std::vector<std::vector<double>> difference_se;
    std::int64_t paths = 0;
};

JointEstimate estimate_crossing_probs(const DiffusionModel& model, const std::vector<BoundarySet>& sets,
                                      const SimConfig& cfg);

struct FptHistogram {
    std::vector<double> edges;
    std::vector<std::int64_t> counts;
    std::vector<double> density;
    std::vector<double> std_error;
    std::int64_t paths = 0;
    std::int64_t crossed = 0;

    std::size_t bins() const noexcept { return counts.size(); }
    double center(std::size_t i) const { return 0.5 * (edges.at(i) + edges.at(i + 1)); }
    double width(std::size_t i) const { return edges.at(i + 1) - edges.at(i); }
};

/// Density of the first exit time on [0, horizon] in equal bins:
/// count / (paths * width) with binomial standard errors.
FptHistogram fpt_histogram(const DiffusionModel& model, const BoundarySet& set, const SimConfig& cfg, int bins);
FptHistogram fpt_histogram(const DiffusionModel& model, const Boundary& g, const SimConfig& cfg, int bins);

inline constexpr std::int64_t kMaxStoredValues = 50'000'000;

/// Stored Euler-Maruyama paths, row-major: path i, step k.
class PathBatch {
public:
    PathBatch(std::int64_t paths, std::int64_t steps, double step, std::vector<double> values);

    std::int64_t paths() const noexcept { return paths_; }
    std::int64_t steps() const noexcept { return steps_; }
    double step() const noexcept { return step_; }
    double at(std::int64_t path, std::int64_t k) const;
    double terminal(std::int64_t path) const { return at(path, steps_); }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::int64_t paths_;
    std::int64_t steps_;
    double step_;
    std::vector<double> values_;
};

/// Paths without boundaries. Throws BudgetError above kMaxStoredValues.
PathBatch simulate_paths(const DiffusionModel& model, const SimConfig& cfg);

}  // namespace fptb
