#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "partune/history.hpp"
#include "partune/model.hpp"
#include "partune/objective.hpp"
#include "partune/scenario.hpp"
#include "partune/space.hpp"

namespace partune {

struct ConfiguratorOptions {
    ForestOptions forest;
    int challengers_per_iter = 4;
    int ei_pool = 10'000;            // random starts scanned by the EI local search
    size_t max_runs_per_config = 2000;
};

struct ConfiguratorResult {
    Configuration incumbent;
    double training_score = 0;       // PAR-k on the incumbent's full (instance, seed) set
    RunHistory history;
    uint64_t seed = 0;
    double budget_consumed = 0;      // target seconds (see run_cost)
    size_t runs_used = 0;
};

// Deterministic per-scenario stream of (instance, seed) pairs; incumbent and
// challengers are always compared on identical prefixes of this ladder.
class SeedLadder {
public:
    SeedLadder(std::vector<std::string> instances, uint64_t seed)
        : instances_(std::move(instances)), seed_(seed) {}

    std::pair<std::string, uint64_t> pair(size_t i) const {
        return {instances_[i % instances_.size()], derive_seed(seed_, i)};
    }

private:
    std::vector<std::string> instances_;
    uint64_t seed_;
};

class BudgetTracker {
public:
    explicit BudgetTracker(const BudgetSpec& spec)
        : spec_(spec), start_(std::chrono::steady_clock::now()) {}

    bool exhausted() const {
        if (spec_.runs && runs_ >= *spec_.runs) return true;
        if (spec_.seconds) {
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            if (elapsed >= *spec_.seconds) return true;
        }
        return false;
    }
    void on_run() { ++runs_; }
    size_t runs_used() const { return runs_; }

private:
    BudgetSpec spec_;
    size_t runs_ = 0;
    std::chrono::steady_clock::time_point start_;
};

// Challenger selection: EI-maximized configurations (best of `ei_pool` random
// starts, hill-climbed over single-parameter neighbourhoods) interleaved
// one-to-one with uniformly random configurations.
std::vector<Configuration> select_challengers(const PerformanceModel& model,
                                              const ParameterSpace& space, int count,
                                              uint64_t rng_seed, double incumbent_score,
                                              int ei_pool = 10'000);

// Single-parameter neighbours of a configuration (used by the EI local search).
std::vector<Configuration> neighbour_configs(const ParameterSpace& space,
                                             const Configuration& config);

// Races one challenger against the incumbent on doubling prefixes of the
// incumbent's ladder pairs. Grows the incumbent by one ladder pair first
// (below max_runs_per_config). Records a trajectory row on promotion.
Configuration intensify(RunHistory& history, const Configuration& incumbent,
                        const Configuration& challenger, const ScenarioSpec& scenario,
                        const ObjectiveSpec& spec, const SeedLadder& ladder, BudgetTracker& budget,
                        const ConfiguratorOptions& options = {});

ConfiguratorResult random_search(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                                 const BudgetSpec& budget, uint64_t rng_seed,
                                 const ConfiguratorOptions& options = {});

ConfiguratorResult smbo_configure(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                                  const BudgetSpec& budget, uint64_t rng_seed,
                                  const ConfiguratorOptions& options = {});

}  // namespace partune
