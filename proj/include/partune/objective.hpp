#pragma once

#include <map>
#include <string>
#include <vector>

#include "partune/runner.hpp"

namespace partune {

struct ObjectiveSpec {
    double cutoff_s = 60.0;
    double k = 10.0;
    ObjectiveSource source = ObjectiveSource::CpuTime;

    static ObjectiveSpec from(const ScenarioSpec& sc) {
        return {sc.cutoff_s, static_cast<double>(sc.par_k), sc.objective};
    }
};

// Per-run PAR contribution: the run's time on SUCCESS (reported metric when
// the objective says so), k x cutoff on TIMEOUT and CRASH.
double par_contribution(const RunResult& r, const ObjectiveSpec& spec);

// Budget/trajectory cost of a run, in seconds. Deterministic for
// reported-metric scenarios: non-SUCCESS runs are charged the cutoff.
double run_cost(const RunResult& r, const ObjectiveSpec& spec);

// Mean PAR-k over the runs. Rejects empty input and harness errors.
double par_score(const std::vector<RunResult>& results, const ObjectiveSpec& spec);

struct InstanceScore {
    double par_k = 0;
    int n_success = 0;
    int n_timeout = 0;
    int n_crash = 0;
    int n_runs() const { return n_success + n_timeout + n_crash; }
};

struct ScoreReport {
    std::string config_id;
    std::map<std::string, InstanceScore> per_instance;
    double overall = 0;  // run-weighted: PAR-k over the pooled run list
    int n_success = 0;
    int n_timeout = 0;
    int n_crash = 0;

    // `config_id,instance,par_k,n_success,n_timeout,n_crash` rows.
    std::string csv() const;
};

class RunHistory;  // defined in history.hpp

ScoreReport aggregate_score(const RunHistory& history, const Configuration& config,
                            const std::vector<std::string>& instances, const ObjectiveSpec& spec);

// 100 x (default - configured) / default. Default must be positive.
double relative_improvement(double default_score, double configured_score);

// Step points of the empirical CDF; ties merged, final probability 1.
std::vector<std::pair<double, double>> ecdf(const std::vector<double>& times);

}  // namespace partune
