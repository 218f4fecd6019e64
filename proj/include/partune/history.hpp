#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "partune/objective.hpp"
#include "partune/runner.hpp"

namespace partune {

struct TrajectoryPoint {
    double elapsed_s = 0;       // target cost consumed when the incumbent changed
    std::string config_id;
    double training_par_k = 0;
    size_t n_runs = 0;          // total runs in the history at that point
};

// Append-only log of target runs plus the incumbent trajectory. Indexed by
// configuration id and by (configuration, instance). Entries never mutate.
// Appends happen on the configurator thread only; batches are appended after
// run_batch returns, so readers always see a complete prefix.
class RunHistory {
public:
    void append(const RunResult& result, const ObjectiveSpec& spec);
    void append_all(const std::vector<RunResult>& results, const ObjectiveSpec& spec);

    const std::vector<RunResult>& runs() const { return runs_; }
    size_t run_count() const { return runs_.size(); }
    size_t distinct_configs() const { return by_config_.size(); }
    double consumed_cost() const { return consumed_cost_; }

    std::vector<const RunResult*> runs_of(const std::string& config_id) const;
    std::vector<const RunResult*> runs_of(const std::string& config_id,
                                          const std::string& instance) const;
    // (instance, seed) pairs of a configuration, in append order, deduplicated.
    std::vector<std::pair<std::string, uint64_t>> pairs_of(const std::string& config_id) const;
    bool has_pair(const std::string& config_id, const std::string& instance, uint64_t seed) const;

    // PAR-k of a configuration over an explicit (instance, seed) set.
    double par_on_pairs(const std::string& config_id,
                        const std::vector<std::pair<std::string, uint64_t>>& pairs,
                        const ObjectiveSpec& spec) const;

    // Trajectory rows are incumbent-change events; scores must never increase.
    void record_incumbent(const std::string& config_id, double training_score);
    const std::vector<TrajectoryPoint>& trajectory() const { return trajectory_; }

    // `elapsed_seconds,config_id,training_par_k,n_runs` rows.
    std::string trajectory_csv() const;

private:
    std::vector<RunResult> runs_;
    std::unordered_map<std::string, std::vector<size_t>> by_config_;
    std::map<std::pair<std::string, std::string>, std::vector<size_t>> by_config_instance_;
    std::vector<TrajectoryPoint> trajectory_;
    double consumed_cost_ = 0;
};

}  // namespace partune
