#include "fptb/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "fptb/errors.hpp"
#include "fptb/numerics/rng.hpp"

namespace fptb {

namespace {

constexpr std::int64_t kBlockPaths = 2048;
constexpr int kMaxHalvings = 20;
constexpr double kBridgeCutoff = 40.0;

int worker_count(const SimConfig& cfg, std::int64_t blocks) {
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(1, n);
    return static_cast<int>(std::min<std::int64_t>(n, std::max<std::int64_t>(1, blocks)));
}

// Runs fn(first, last, block_result) over fixed path blocks and returns the
// per-block results in block order, independent of scheduling.
template <class Result, class Fn>
std::vector<Result> run_blocks(std::int64_t paths, const SimConfig& cfg, const Result& proto, Fn fn) {
    const std::int64_t blocks = (paths + kBlockPaths - 1) / kBlockPaths;
    std::vector<Result> out(static_cast<std::size_t>(blocks), proto);
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= blocks || failed.load()) return;
            try {
                fn(b * kBlockPaths, std::min(paths, (b + 1) * kBlockPaths), out[static_cast<std::size_t>(b)]);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    const int n = worker_count(cfg, blocks);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

struct SetGrid {
    bool has_upper = false;
    bool has_lower = false;
    std::vector<double> upper;
    std::vector<double> lower;
};

std::vector<SetGrid> tabulate(const DiffusionModel& model, const std::vector<BoundarySet>& sets, std::int64_t n,
                              double h) {
    std::vector<SetGrid> out;
    out.reserve(sets.size());
    for (const auto& s : sets) {
        if (!s.upper && !s.lower) throw InvalidModelError("boundary set is empty");
        SetGrid g;
        if (s.upper) {
            if (s.upper->side() != Side::Upper) throw InvalidModelError("upper slot holds a lower boundary");
            check_pairing(model, *s.upper);
            g.has_upper = true;
            g.upper.resize(static_cast<std::size_t>(n + 1));
            for (std::int64_t k = 0; k <= n; ++k) g.upper[k] = (*s.upper)(std::min(1.0, k * h));
        }
        if (s.lower) {
            if (s.lower->side() != Side::Lower) throw InvalidModelError("lower slot holds an upper boundary");
            check_pairing(model, *s.lower);
            g.has_lower = true;
            g.lower.resize(static_cast<std::size_t>(n + 1));
            for (std::int64_t k = 0; k <= n; ++k) g.lower[k] = (*s.lower)(std::min(1.0, k * h));
        }
        out.push_back(std::move(g));
    }
    return out;
}

// One Euler step; on the half line a step that lands at or below 0 is split
// into two Brownian-bridge-consistent halves, recursively.
double advance(const DiffusionModel& model, double x, double h, double dw, int depth, numerics::RngStream& aux) {
    const double x1 = x + model.mu(x) * h + dw;
    if (model.interval() == DiffusionInterval::A || x1 > 0.0) return x1;
    if (depth >= kMaxHalvings) return std::max(std::abs(x1), std::numeric_limits<double>::min());
    const double dw1 = 0.5 * dw + std::sqrt(0.25 * h) * aux.normal();
    const double xm = advance(model, x, 0.5 * h, dw1, depth + 1, aux);
    return advance(model, xm, 0.5 * h, dw - dw1, depth + 1, aux);
}

struct PathStreams {
    numerics::RngStream increments;
    numerics::RngStream bridge;
    numerics::RngStream halving;

    PathStreams(std::uint64_t seed, std::int64_t id)
        : increments(seed, 3 * static_cast<std::uint64_t>(id)),
          bridge(seed, 3 * static_cast<std::uint64_t>(id) + 1),
          halving(seed, 3 * static_cast<std::uint64_t>(id) + 2) {}
};

double bridge_probability(double a, double b, double h) {
    if (a <= 0.0 || b <= 0.0) return 1.0;
    const double e = 2.0 * a * b / h;
    return e > kBridgeCutoff ? 0.0 : std::exp(-e);
}

// Exit times of one path for every set; negative means no exit.
void simulate_exits(const DiffusionModel& model, const std::vector<SetGrid>& sets, const SimConfig& cfg,
                    std::int64_t n, double h, std::int64_t id, std::vector<double>& exit_time) {
    PathStreams rng(cfg.seed, id);
    const double sqrt_h = std::sqrt(h);
    std::fill(exit_time.begin(), exit_time.end(), -1.0);
    std::size_t alive = sets.size();
    double x = model.x();
    for (std::int64_t k = 0; k < n && alive > 0; ++k) {
        const double dw = sqrt_h * rng.increments.normal();
        const double x1 = advance(model, x, h, dw, 0, rng.halving);
        const double u = cfg.bridge_correction ? rng.bridge.uniform() : 1.0;
        const double t_k = k * h;
        for (std::size_t s = 0; s < sets.size(); ++s) {
            if (exit_time[s] >= 0.0) continue;
            const SetGrid& g = sets[s];
            const double a_up = g.has_upper ? g.upper[k] - x : 0.0;
            const double b_up = g.has_upper ? g.upper[k + 1] - x1 : 0.0;
            const double a_lo = g.has_lower ? x - g.lower[k] : 0.0;
            const double b_lo = g.has_lower ? x1 - g.lower[k + 1] : 0.0;
            double when = -1.0;
            if (g.has_upper && b_up <= 0.0) {
                when = t_k + h * a_up / (a_up - b_up);
            } else if (g.has_lower && b_lo <= 0.0) {
                when = t_k + h * a_lo / (a_lo - b_lo);
            } else if (cfg.bridge_correction) {
                const double p_up = g.has_upper ? bridge_probability(a_up, b_up, h) : 0.0;
                const double p_lo = g.has_lower ? bridge_probability(a_lo, b_lo, h) : 0.0;
                if (u < p_up) {
                    when = t_k + h * (u / p_up);
                } else if (u < p_up + p_lo) {
                    when = t_k + h * ((u - p_up) / p_lo);
                }
            }
            if (when >= 0.0) {
                exit_time[s] = std::clamp(when, t_k, t_k + h);
                --alive;
            }
        }
        x = x1;
    }
}

void check_budget(const SimConfig& cfg) {
    cfg.validate();
    const double work = static_cast<double>(cfg.paths) * static_cast<double>(cfg.steps());
    if (work > cfg.budget) {
        std::ostringstream os;
        os << "simulation needs " << work << " steps, above the budget of " << cfg.budget;
        throw BudgetError(os.str());
    }
}

struct JointCounts {
    std::vector<std::int64_t> both;  // S x S, diagonal = single counts
};

}  // namespace

void SimConfig::validate() const {
    if (paths < 1) throw DomainError("paths must be at least 1");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("step must be positive");
    if (!(horizon > 0.0) || horizon > 1.0) throw DomainError("horizon must lie in (0, 1]");
    if (step > horizon) throw DomainError("step must not exceed the horizon");
    if (!(budget > 0.0)) throw DomainError("budget must be positive");
}

std::int64_t SimConfig::steps() const {
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(horizon / step - 1e-9)));
}

double SimConfig::effective_step() const { return horizon / static_cast<double>(steps()); }

BoundarySet BoundarySet::one(const Boundary& g) {
    BoundarySet s;
    if (g.side() == Side::Upper) {
        s.upper = g;
    } else {
        s.lower = g;
    }
    return s;
}

BoundarySet BoundarySet::band(const Boundary& upper, const Boundary& lower) {
    BoundarySet s;
    s.upper = upper;
    s.lower = lower;
    return s;
}

JointEstimate estimate_crossing_probs(const DiffusionModel& model, const std::vector<BoundarySet>& sets,
                                      const SimConfig& cfg) {
    check_budget(cfg);
    if (sets.empty()) throw DomainError("no boundary sets given");
    const std::int64_t n = cfg.steps();
    const double h = cfg.effective_step();
    const auto grids = tabulate(model, sets, n, h);
    const std::size_t S = sets.size();
    JointCounts proto{std::vector<std::int64_t>(S * S, 0)};
    auto blocks = run_blocks(cfg.paths, cfg, proto, [&](std::int64_t first, std::int64_t last, JointCounts& out) {
        std::vector<double> exits(S);
        for (std::int64_t id = first; id < last; ++id) {
            simulate_exits(model, grids, cfg, n, h, id, exits);
            for (std::size_t i = 0; i < S; ++i) {
                if (exits[i] < 0.0) continue;
                for (std::size_t j = 0; j < S; ++j) {
                    if (exits[j] >= 0.0) ++out.both[i * S + j];
                }
            }
        }
    });
    std::vector<std::int64_t> both(S * S, 0);
    for (const auto& b : blocks) {
        for (std::size_t i = 0; i < both.size(); ++i) both[i] += b.both[i];
    }
    const double np = static_cast<double>(cfg.paths);
    JointEstimate out;
    out.paths = cfg.paths;
    for (std::size_t i = 0; i < S; ++i) {
        const double p = static_cast<double>(both[i * S + i]) / np;
        out.crossing.push_back({p, std::sqrt(p * (1.0 - p) / np), cfg.paths, cfg});
    }
    out.difference_se.assign(S, std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < S; ++i) {
        for (std::size_t j = 0; j < S; ++j) {
            const double pi = out.crossing[i].value;
            const double pj = out.crossing[j].value;
            const double pij = static_cast<double>(both[i * S + j]) / np;
            const double var = std::max(0.0, pi + pj - 2.0 * pij - (pi - pj) * (pi - pj));
            out.difference_se[i][j] = std::sqrt(var / np);
        }
    }
    return out;
}

MCEstimate estimate_crossing_prob(const DiffusionModel& model, const BoundarySet& set, const SimConfig& cfg) {
    return estimate_crossing_probs(model, {set}, cfg).crossing.front();
}

MCEstimate estimate_crossing_prob(const DiffusionModel& model, const Boundary& g, const SimConfig& cfg) {
    return estimate_crossing_prob(model, BoundarySet::one(g), cfg);
}

FptHistogram fpt_histogram(const DiffusionModel& model, const BoundarySet& set, const SimConfig& cfg, int bins) {
    check_budget(cfg);
    if (bins < 1) throw DomainError("histogram needs at least one bin");
    const std::int64_t n = cfg.steps();
    const double h = cfg.effective_step();
    const auto grids = tabulate(model, {set}, n, h);
    const double width = cfg.horizon / bins;
    std::vector<std::int64_t> proto(static_cast<std::size_t>(bins), 0);
    auto blocks = run_blocks(cfg.paths, cfg, proto, [&](std::int64_t first, std::int64_t last, std::vector<std::int64_t>& out) {
        std::vector<double> exits(1);
        for (std::int64_t id = first; id < last; ++id) {
            simulate_exits(model, grids, cfg, n, h, id, exits);
            if (exits[0] < 0.0) continue;
            const auto b = std::min<std::int64_t>(bins - 1, static_cast<std::int64_t>(exits[0] / width));
            ++out[static_cast<std::size_t>(b)];
        }
    });
    FptHistogram hist;
    hist.paths = cfg.paths;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    for (const auto& b : blocks) {
        for (int i = 0; i < bins; ++i) hist.counts[i] += b[i];
    }
    hist.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) hist.edges[i] = cfg.horizon * i / bins;
    const double np = static_cast<double>(cfg.paths);
    for (int i = 0; i < bins; ++i) {
        const double p = static_cast<double>(hist.counts[i]) / np;
        const double w = hist.width(i);
        hist.density.push_back(p / w);
        hist.std_error.push_back(std::sqrt(p * (1.0 - p) / np) / w);
        hist.crossed += hist.counts[i];
    }
    return hist;
}

FptHistogram fpt_histogram(const DiffusionModel& model, const Boundary& g, const SimConfig& cfg, int bins) {
    return fpt_histogram(model, BoundarySet::one(g), cfg, bins);
}

PathBatch::PathBatch(std::int64_t paths, std::int64_t steps, double step, std::vector<double> values)
    : paths_(paths), steps_(steps), step_(step), values_(std::move(values)) {
    if (static_cast<std::int64_t>(values_.size()) != paths_ * (steps_ + 1)) {
        throw DomainError("path batch size mismatch");
    }
}

double PathBatch::at(std::int64_t path, std::int64_t k) const {
    if (path < 0 || path >= paths_ || k < 0 || k > steps_) throw DomainError("path index out of range");
    return values_[static_cast<std::size_t>(path * (steps_ + 1) + k)];
}

PathBatch simulate_paths(const DiffusionModel& model, const SimConfig& cfg) {
    check_budget(cfg);
    const std::int64_t n = cfg.steps();
    const double h = cfg.effective_step();
    if (static_cast<double>(cfg.paths) * static_cast<double>(n + 1) > static_cast<double>(kMaxStoredValues)) {
        throw BudgetError("path batch too large to store");
    }
    std::vector<double> values(static_cast<std::size_t>(cfg.paths * (n + 1)));
    const double sqrt_h = std::sqrt(h);
    run_blocks(cfg.paths, cfg, 0, [&](std::int64_t first, std::int64_t last, int&) {
        for (std::int64_t id = first; id < last; ++id) {
            PathStreams rng(cfg.seed, id);
            double* row = values.data() + id * (n + 1);
            row[0] = model.x();
            for (std::int64_t k = 0; k < n; ++k) {
                const double dw = sqrt_h * rng.increments.normal();
                row[k + 1] = advance(model, row[k], h, dw, 0, rng.halving);
            }
        }
    });
    return PathBatch(cfg.paths, n, h, std::move(values));
}

}  // namespace fptb
