#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "partune/configure.hpp"
#include "partune/history.hpp"
#include "partune/objective.hpp"
#include "partune/scenario.hpp"

namespace partune {

struct CampaignSpec {
    ScenarioSpec scenario;
    int n_runs = 25;
    uint64_t master_seed = 0;
    int validation_runs = 100;
    std::vector<int> load_levels;
    std::string strategy = "smbo";  // or "random"
    std::filesystem::path out_dir;
};

struct CampaignRun {
    size_t index = 0;  // 1-based
    bool failed = false;
    std::string error;
    bool best_training = false;
    ConfiguratorResult result;
};

// N independent configurator runs with seeds derived from the master seed.
// Artifacts land under out_dir: runNN.cfg, runNN.traj, campaign.csv and the
// appended run log. A failing run aborts only itself.
std::vector<CampaignRun> run_campaign(const CampaignSpec& campaign,
                                      const ConfiguratorOptions& options = {});

struct ValidationRow {
    std::string label;
    double overall = 0;
    std::map<std::string, InstanceScore> per_instance;
    double rel_impr = 0;  // vs the default row; 0 for the default itself
    size_t n_harness_errors = 0;
};

struct ValidationTable {
    int load_tag = 1;
    std::string default_label;
    std::vector<ValidationRow> rows;  // default first

    std::string render_text() const;  // Table-2 style: default, configured, rel. impr.
    std::string csv() const;
};

// runs_per_instance x |instances| matched-seed runs per configuration at the
// given concurrency limit. The labeled list must include the default
// configuration. Raw results are appended to *raw when given.
ValidationTable validate_configurations(const ScenarioSpec& scenario,
                                        const std::vector<std::pair<std::string, Configuration>>& configs,
                                        int runs_per_instance, int load_level, uint64_t rng_seed = 0,
                                        std::vector<RunResult>* raw = nullptr);

struct RankEntry {
    int rank = 0;
    std::string label;
    double score = 0;
    double default_score = 0;
};

// Ascending PAR-k, ties by ascending id; the default's score rides alongside.
std::vector<RankEntry> rank_by_validation(const ValidationTable& table, int top);
std::string ranking_csv(const std::vector<RankEntry>& ranking);

// Plot data emission. ECDF and scatter read persisted run results; trajectory
// is the configure module's rows. File content is deterministic given inputs.
void emit_ecdf_data(const std::vector<RunResult>& runs, const ObjectiveSpec& spec,
                    const std::filesystem::path& out);
void emit_scatter_data(const std::vector<RunResult>& runs, const ObjectiveSpec& spec,
                       const std::string& default_config_id, const std::filesystem::path& out);
void emit_trajectory_data(const RunHistory& history, const std::filesystem::path& out);

// Single-line canonical configuration files ("name=value ..." plus comments).
Configuration load_config_file(const ParameterSpace& space, const std::filesystem::path& file);
void write_config_file(const Configuration& config, const std::filesystem::path& file);

}  // namespace partune
