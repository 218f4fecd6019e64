#pragma once

#include <optional>
#include <string>
#include <vector>

#include "partune/objective.hpp"
#include "partune/scenario.hpp"
#include "partune/space.hpp"

namespace partune {

struct AblationStep {
    int round = 0;  // 1-based distance from default
    std::string parameter;
    std::optional<Value> from;  // nullopt = inactive before the step
    std::optional<Value> to;    // nullopt = inactive after the step
    double score_after = 0;
    // share of the default-to-target improvement; raw score delta in seconds
    // when the path is unnormalized
    double portion = 0;
};

struct RoundEvaluation {
    std::string config_id;
    std::string parameter;  // the modification this candidate applies
    double score = 0;
};

struct AblationPath {
    double default_score = 0;
    double target_score = 0;
    std::vector<AblationStep> steps;
    std::vector<std::string> instances;
    int runs_per_eval = 0;
    bool normalized = true;  // false (with a warning) when target is not better
    bool stuck = false;      // every single flip was forbidden at some round
    std::vector<std::vector<RoundEvaluation>> round_evaluations;

    // `distance from default, parameter modified, from, to, portion` table.
    std::string render_table() const;
    std::string csv() const;
};

// One candidate per parameter still differing from the target: that parameter
// set to its target value, with any children the flip activates set atomically
// to their target values (or defaults when the target leaves them inactive).
// Candidates that would hit a forbidden clause are skipped.
std::vector<Configuration> ablation_candidates(const ParameterSpace& space,
                                               const Configuration& current,
                                               const Configuration& target);

// Greedy walk from default to target, taking the best single-parameter
// modification each round. Candidate evaluations use matched (instance, seed)
// sets of runs_per_eval runs per instance.
AblationPath ablation_path(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                           const Configuration& default_config, const Configuration& target,
                           const std::vector<std::string>& instances, int runs_per_eval,
                           uint64_t rng_seed = 0);

}  // namespace partune
