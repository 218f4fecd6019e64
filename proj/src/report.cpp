#include "partune/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace partune {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw HarnessError("cannot write '" + path.string() + "'");
    out << content;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// Observed per-run time for plotting: the scored time on SUCCESS, the cutoff
// for runs that never finished.
double plot_time(const RunResult& r, const ObjectiveSpec& spec) {
    if (r.outcome == Outcome::Success)
        return spec.source == ObjectiveSource::ReportedMetric && r.reported ? *r.reported
                                                                            : r.measured_s;
    return spec.cutoff_s;
}

}  // namespace

std::vector<CampaignRun> run_campaign(const CampaignSpec& campaign,
                                      const ConfiguratorOptions& options) {
    if (campaign.n_runs < 1) throw std::invalid_argument("campaign needs n_runs >= 1");
    std::filesystem::create_directories(campaign.out_dir);
    const ObjectiveSpec objective = ObjectiveSpec::from(campaign.scenario);

    std::vector<CampaignRun> runs;
    for (int i = 1; i <= campaign.n_runs; ++i) {
        CampaignRun run;
        run.index = static_cast<size_t>(i);
        uint64_t seed = derive_seed(campaign.master_seed, static_cast<uint64_t>(i));
        try {
            run.result = campaign.strategy == "random"
                             ? random_search(campaign.scenario, objective, campaign.scenario.budget,
                                             seed, options)
                             : smbo_configure(campaign.scenario, objective, campaign.scenario.budget,
                                              seed, options);
        } catch (const std::exception& ex) {
            run.failed = true;
            run.error = ex.what();
            runs.push_back(std::move(run));
            continue;
        }
        char name[32];
        std::snprintf(name, sizeof name, "run%02d", i);
        write_config_file(run.result.incumbent, campaign.out_dir / (std::string(name) + ".cfg"));
        write_file(campaign.out_dir / (std::string(name) + ".traj"),
                   run.result.history.trajectory_csv());
        append_run_log(campaign.out_dir / "runlog.ndjson", run.result.history.runs());
        runs.push_back(std::move(run));
    }

    // flag the best-training incumbent (lowest training PAR-k, lowest index on ties)
    const CampaignRun* best = nullptr;
    for (const CampaignRun& r : runs)
        if (!r.failed && (!best || r.result.training_score < best->result.training_score)) best = &r;
    std::ostringstream csv;
    csv << "run,status,config_id,training_par_k,runs_used,budget_used,best_training\n";
    for (CampaignRun& r : runs) {
        r.best_training = best == &r;
        if (r.failed) {
            csv << r.index << ",failed,,,,,0\n";
            continue;
        }
        csv << r.index << ",ok," << r.result.incumbent.id() << ','
            << render_value(Value{r.result.training_score}) << ',' << r.result.runs_used << ','
            << render_value(Value{r.result.budget_consumed}) << ',' << (r.best_training ? 1 : 0)
            << '\n';
    }
    write_file(campaign.out_dir / "campaign.csv", csv.str());
    return runs;
}

ValidationTable validate_configurations(
    const ScenarioSpec& scenario, const std::vector<std::pair<std::string, Configuration>>& configs,
    int runs_per_instance, int load_level, uint64_t rng_seed, std::vector<RunResult>* raw) {
    if (configs.empty()) throw std::invalid_argument("no configurations to validate");
    if (runs_per_instance < 1) throw std::invalid_argument("runs_per_instance must be >= 1");
    if (load_level < 1) throw std::invalid_argument("load level must be >= 1");

    const Configuration defaults = default_config(scenario.space);
    const ObjectiveSpec objective = ObjectiveSpec::from(scenario);

    size_t default_index = configs.size();
    for (size_t i = 0; i < configs.size(); ++i)
        if (configs[i].second == defaults) {
            default_index = i;
            break;
        }
    if (default_index == configs.size())
        throw std::invalid_argument("validation requires the default configuration in the list");

    ValidationTable table;
    table.load_tag = load_level;
    table.default_label = configs[default_index].first;

    // matched (instance, seed) grid shared by every configuration
    std::vector<std::pair<std::string, uint64_t>> grid;
    for (const std::string& inst : scenario.instances)
        for (int j = 0; j < runs_per_instance; ++j)
            grid.emplace_back(inst, derive_seed(rng_seed, static_cast<uint64_t>(j)));

    auto score_one = [&](const std::pair<std::string, Configuration>& labeled) {
        std::vector<RunSpec> specs;
        specs.reserve(grid.size());
        for (const auto& [inst, seed] : grid) specs.push_back({labeled.second, inst, seed});
        std::vector<RunResult> results = run_batch(scenario, specs, load_level);
        if (raw) raw->insert(raw->end(), results.begin(), results.end());

        ValidationRow row;
        row.label = labeled.first;
        double pooled_sum = 0;
        size_t pooled_n = 0;
        for (const std::string& inst : scenario.instances) row.per_instance[inst] = {};
        for (const RunResult& r : results) {
            InstanceScore& s = row.per_instance[r.spec.instance];
            switch (r.outcome) {
                case Outcome::Success: ++s.n_success; break;
                case Outcome::Timeout: ++s.n_timeout; break;
                case Outcome::Crash: ++s.n_crash; break;
                case Outcome::HarnessError:
                    ++row.n_harness_errors;
                    continue;  // excluded from PAR, visibly counted
            }
            double c = par_contribution(r, objective);
            s.par_k += c;  // accumulate; normalized below
            pooled_sum += c;
            ++pooled_n;
        }
        for (auto& [inst, s] : row.per_instance)
            s.par_k = s.n_runs() > 0 ? s.par_k / s.n_runs() : std::nan("");
        row.overall = pooled_n > 0 ? pooled_sum / static_cast<double>(pooled_n) : std::nan("");
        return row;
    };

    ValidationRow default_row = score_one(configs[default_index]);
    default_row.rel_impr = 0;  // by definition
    table.rows.push_back(default_row);
    for (size_t i = 0; i < configs.size(); ++i) {
        if (i == default_index) continue;
        ValidationRow row = score_one(configs[i]);
        row.rel_impr = relative_improvement(default_row.overall, row.overall);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string ValidationTable::render_text() const {
    std::ostringstream out;
    out << "validation at load " << load_tag << " (default: " << default_label << ")\n";
    char line[4096];
    std::snprintf(line, sizeof line, "%-40s %10s", "instance", default_label.c_str());
    out << line;
    for (size_t i = 1; i < rows.size(); ++i) {
        std::snprintf(line, sizeof line, " %10s %10s", rows[i].label.c_str(), "rel.impr%");
        out << line;
    }
    out << '\n';

    std::vector<std::string> instances;
    for (const auto& [inst, s] : rows.front().per_instance) instances.push_back(inst);
    for (const std::string& inst : instances) {
        std::snprintf(line, sizeof line, "%-40s %10s", inst.c_str(),
                      fixed(rows.front().per_instance.at(inst).par_k, 3).c_str());
        out << line;
        for (size_t i = 1; i < rows.size(); ++i) {
            const InstanceScore& s = rows[i].per_instance.at(inst);
            double d = rows.front().per_instance.at(inst).par_k;
            std::snprintf(line, sizeof line, " %10s %10s", fixed(s.par_k, 3).c_str(),
                          fixed(relative_improvement(d, s.par_k), 2).c_str());
            out << line;
        }
        out << '\n';
    }
    std::snprintf(line, sizeof line, "%-40s %10s", "ALL", fixed(rows.front().overall, 3).c_str());
    out << line;
    for (size_t i = 1; i < rows.size(); ++i) {
        std::snprintf(line, sizeof line, " %10s %10s", fixed(rows[i].overall, 3).c_str(),
                      fixed(rows[i].rel_impr, 2).c_str());
        out << line;
    }
    out << '\n';
    for (const ValidationRow& r : rows)
        if (r.n_harness_errors > 0)
            out << "harness errors for " << r.label << ": " << r.n_harness_errors
                << " (excluded from PAR)\n";
    return out.str();
}

std::string ValidationTable::csv() const {
    std::ostringstream out;
    out << "config_id,instance,par_k,n_success,n_timeout,n_crash,n_harness_error,rel_impr,load\n";
    for (const ValidationRow& r : rows) {
        int total_success = 0, total_timeout = 0, total_crash = 0;
        for (const auto& [inst, s] : r.per_instance) {
            out << r.label << ',' << inst << ',' << render_value(Value{s.par_k}) << ',' << s.n_success
                << ',' << s.n_timeout << ',' << s.n_crash << ",,," << load_tag << '\n';
            total_success += s.n_success;
            total_timeout += s.n_timeout;
            total_crash += s.n_crash;
        }
        out << r.label << ",ALL," << render_value(Value{r.overall}) << ',' << total_success << ','
            << total_timeout << ',' << total_crash << ',' << r.n_harness_errors << ','
            << render_value(Value{r.rel_impr}) << ',' << load_tag << '\n';
    }
    return out.str();
}

std::vector<RankEntry> rank_by_validation(const ValidationTable& table, int top) {
    if (table.rows.empty()) throw std::invalid_argument("cannot rank an empty table");
    if (top < 1) throw std::invalid_argument("top must be >= 1");
    std::vector<const ValidationRow*> sorted;
    for (const ValidationRow& r : table.rows) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const ValidationRow* a, const ValidationRow* b) {
        if (a->overall != b->overall) return a->overall < b->overall;
        return a->label < b->label;
    });
    double default_score = table.rows.front().overall;
    std::vector<RankEntry> out;
    for (size_t i = 0; i < sorted.size() && static_cast<int>(i) < top; ++i)
        out.push_back({static_cast<int>(i) + 1, sorted[i]->label, sorted[i]->overall, default_score});
    return out;
}

std::string ranking_csv(const std::vector<RankEntry>& ranking) {
    std::ostringstream out;
    out << "rank,config_id,par_k,default_par_k\n";
    for (const RankEntry& e : ranking)
        out << e.rank << ',' << e.label << ',' << render_value(Value{e.score}) << ','
            << render_value(Value{e.default_score}) << '\n';
    return out.str();
}

void emit_ecdf_data(const std::vector<RunResult>& runs, const ObjectiveSpec& spec,
                    const std::filesystem::path& out_path) {
    if (runs.empty()) throw std::invalid_argument("no runs to plot");
    std::map<std::string, std::vector<double>> by_config;
    for (const RunResult& r : runs) {
        if (r.outcome == Outcome::HarnessError) continue;
        by_config[r.spec.config.id()].push_back(plot_time(r, spec));
    }
    std::ostringstream out;
    out << "# ecdf step data: time,cum_prob\n";
    for (const auto& [id, times] : by_config) {
        if (times.empty()) continue;
        out << "# config " << id << '\n';
        for (const auto& [t, p] : ecdf(times))
            out << render_value(Value{t}) << ',' << fixed(p, 4) << '\n';
        out << '\n';
    }
    write_file(out_path, out.str());
}

void emit_scatter_data(const std::vector<RunResult>& runs, const ObjectiveSpec& spec,
                       const std::string& default_config_id, const std::filesystem::path& out_path) {
    std::map<std::pair<std::string, uint64_t>, double> default_times;
    std::set<std::string> other_ids;
    for (const RunResult& r : runs) {
        if (r.outcome == Outcome::HarnessError) continue;
        if (r.spec.config.id() == default_config_id)
            default_times[{r.spec.instance, r.spec.seed}] = plot_time(r, spec);
        else
            other_ids.insert(r.spec.config.id());
    }
    if (default_times.empty())
        throw std::invalid_argument("no runs of the default configuration " + default_config_id);

    std::ostringstream out;
    out << "# scatter data: instance,seed,default_time,config_time\n";
    for (const std::string& id : other_ids) {
        out << "# config " << id << " vs " << default_config_id << '\n';
        for (const RunResult& r : runs) {
            if (r.outcome == Outcome::HarnessError || r.spec.config.id() != id) continue;
            auto it = default_times.find({r.spec.instance, r.spec.seed});
            if (it == default_times.end())
                throw std::invalid_argument("no default run matches (" + r.spec.instance + ", " +
                                            std::to_string(r.spec.seed) + ")");
            out << r.spec.instance << ',' << r.spec.seed << ',' << render_value(Value{it->second})
                << ',' << render_value(Value{plot_time(r, spec)}) << '\n';
        }
        out << '\n';
    }
    write_file(out_path, out.str());
}

void emit_trajectory_data(const RunHistory& history, const std::filesystem::path& out_path) {
    write_file(out_path, history.trajectory_csv());
}

Configuration load_config_file(const ParameterSpace& space, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw HarnessError("cannot open configuration file '" + file.string() + "'");
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return parse_config(space, line);
    }
    throw HarnessError("configuration file '" + file.string() + "' is empty");
}

void write_config_file(const Configuration& config, const std::filesystem::path& file) {
    write_file(file, config.canonical() + "\n");
}

}  // namespace partune
