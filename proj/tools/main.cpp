#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "partune/ablation.hpp"
#include "partune/configure.hpp"
#include "partune/refine.hpp"
#include "partune/report.hpp"

namespace fs = std::filesystem;
using namespace partune;

namespace {

struct GlobalArgs {
    std::string scenario_path;
    uint64_t seed = 0;
    int jobs = 0;  // 0 = use the scenario's limit
    std::string out_dir = "partune-out";
};

ScenarioSpec load_scenario(const GlobalArgs& g) {
    if (g.scenario_path.empty()) throw ScenarioError("--scenario <file> is required");
    ScenarioSpec sc = ScenarioSpec::load(g.scenario_path);
    if (g.jobs > 0) sc.jobs = g.jobs;
    return sc;
}

fs::path ensure_out(const GlobalArgs& g) {
    fs::path out(g.out_dir);
    fs::create_directories(out);
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw HarnessError("cannot write '" + path.string() + "'");
    f << content;
}

// ALL rows of a validation.csv, in file order (default row first).
ValidationTable read_validation_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open table '" + path.string() + "'");
    ValidationTable table;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cols;
        std::istringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() < 9 || cols[1] != "ALL") continue;
        ValidationRow row;
        row.label = cols[0];
        row.overall = *parse_real(cols[2]);
        row.rel_impr = cols[7].empty() ? 0 : *parse_real(cols[7]);
        table.load_tag = static_cast<int>(*parse_int(cols[8]));
        if (table.rows.empty()) table.default_label = row.label;
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw ScenarioError("no ALL rows found in '" + path.string() + "'");
    return table;
}

int cmd_space_check(const std::string& space_file) {
    ParameterSpace space = parse_space_file(space_file);
    Configuration def = default_config(space);
    std::cout << "ok: " << space.parameters().size() << " parameters, "
              << space.conditions().size() << " conditions, " << space.forbidden().size()
              << " forbidden clauses\n";
    std::cout << "default: " << def.canonical() << "\n";
    return 0;
}

int cmd_space_sample(const std::string& space_file, int n, uint64_t seed) {
    ParameterSpace space = parse_space_file(space_file);
    for (int i = 0; i < n; ++i)
        std::cout << sample_random(space, derive_seed(seed, static_cast<uint64_t>(i))).canonical()
                  << "\n";
    return 0;
}

int cmd_scan(const GlobalArgs& g, size_t n) {
    ScenarioSpec sc = load_scenario(g);
    fs::path out = ensure_out(g);
    CrashReport report = crash_scan(sc, sc.space, n, g.seed);
    std::cout << report.crashing.size() << " of " << report.sampled << " sampled configurations crashed\n";
    if (report.crashing.empty()) {
        write_text(out / "proposals.txt", render_proposal_report(report, {}));
        std::cout << "no crashes; nothing to refine\n";
        return 0;
    }
    auto proposals = propose_refinements(sc.space, report, report.non_crashing);
    write_text(out / "proposals.txt", render_proposal_report(report, proposals));
    ParameterSpace refined = apply_proposals(sc.space, proposals);
    fs::path refined_path = out / (fs::path(sc.space_path).filename().string() + ".refined");
    write_text(refined_path, render_space(refined));
    std::cout << render_proposal_report(report, proposals);
    std::cout << "patched space written to " << refined_path.string() << "\n";
    return 0;
}

int cmd_tune(const GlobalArgs& g, int runs, const std::string& strategy) {
    CampaignSpec campaign;
    campaign.scenario = load_scenario(g);
    campaign.n_runs = runs;
    campaign.master_seed = g.seed;
    campaign.strategy = strategy;
    campaign.out_dir = ensure_out(g);
    auto results = run_campaign(campaign);
    for (const CampaignRun& r : results) {
        if (r.failed) {
            std::cout << "run " << r.index << ": failed (" << r.error << ")\n";
            continue;
        }
        std::cout << "run " << r.index << ": " << r.result.incumbent.id() << " training par "
                  << r.result.training_score << " (" << r.result.runs_used << " runs)"
                  << (r.best_training ? "  <- best training" : "") << "\n";
    }
    std::cout << "artifacts in " << campaign.out_dir.string() << "\n";
    return 0;
}

int cmd_validate(const GlobalArgs& g, const std::vector<std::string>& config_files,
                 int runs_per_instance, int load_level) {
    ScenarioSpec sc = load_scenario(g);
    fs::path out = ensure_out(g);
    std::vector<std::pair<std::string, Configuration>> configs;
    configs.emplace_back("default", default_config(sc.space));
    for (const std::string& f : config_files)
        configs.emplace_back(fs::path(f).stem().string(), load_config_file(sc.space, f));
    if (load_level <= 0) load_level = sc.jobs;

    std::vector<RunResult> raw;
    ValidationTable table =
        validate_configurations(sc, configs, runs_per_instance, load_level, g.seed, &raw);
    append_run_log(out / "runlog.ndjson", raw);
    write_text(out / "validation.csv", table.csv());
    write_text(out / "validation.txt", table.render_text());
    std::cout << table.render_text();
    return 0;
}

int cmd_rank(const GlobalArgs& g, const std::string& table_file, int top) {
    ValidationTable table = read_validation_csv(table_file);
    auto ranking = rank_by_validation(table, top);
    fs::path out = ensure_out(g);
    write_text(out / "ranking.csv", ranking_csv(ranking));
    std::cout << ranking_csv(ranking);
    return 0;
}

int cmd_ablate(const GlobalArgs& g, const std::string& target_file, const std::string& from_file,
               const std::vector<std::string>& instances, int runs_per_eval) {
    ScenarioSpec sc = load_scenario(g);
    fs::path out = ensure_out(g);
    Configuration from =
        from_file.empty() ? default_config(sc.space) : load_config_file(sc.space, from_file);
    Configuration target = load_config_file(sc.space, target_file);
    ObjectiveSpec objective = ObjectiveSpec::from(sc);
    AblationPath path = ablation_path(sc, objective, from, target, instances, runs_per_eval, g.seed);
    write_text(out / "ablation.txt", path.render_table());
    write_text(out / "ablation.csv", path.csv());
    std::cout << path.render_table();
    return 0;
}

int cmd_plot_data(const GlobalArgs& g, const std::string& kind, const std::string& log_file,
                  const std::string& traj_file, std::string default_id) {
    fs::path out = ensure_out(g);
    if (kind == "trajectory") {
        if (traj_file.empty()) throw ScenarioError("--traj <file> is required for trajectory data");
        std::ifstream in(traj_file);
        if (!in) throw ScenarioError("cannot open trajectory '" + traj_file + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        write_text(out / "trajectory.csv", ss.str());
        std::cout << "trajectory data written to " << (out / "trajectory.csv").string() << "\n";
        return 0;
    }
    ScenarioSpec sc = load_scenario(g);
    if (log_file.empty()) throw ScenarioError("--log <runlog.ndjson> is required");
    std::vector<RunResult> runs = read_run_log(log_file, sc.space);
    ObjectiveSpec objective = ObjectiveSpec::from(sc);
    if (kind == "ecdf") {
        emit_ecdf_data(runs, objective, out / "ecdf.csv");
        std::cout << "ecdf data written to " << (out / "ecdf.csv").string() << "\n";
    } else if (kind == "scatter") {
        if (default_id.empty()) default_id = default_config(sc.space).id();
        emit_scatter_data(runs, objective, default_id, out / "scatter.csv");
        std::cout << "scatter data written to " << (out / "scatter.csv").string() << "\n";
    } else {
        throw ScenarioError("unknown plot kind '" + kind + "'");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"partune: automatic parameter configuration of command-line programs"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags are accepted after subcommand names too

    GlobalArgs g;
    app.add_option("--scenario", g.scenario_path, "scenario JSON file");
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--jobs", g.jobs, "concurrency limit override");
    app.add_option("--out", g.out_dir, "output directory for artifacts");

    auto* space_cmd = app.add_subcommand("space", "inspect a parameter space file");
    std::string space_file;
    int sample_n = 10;
    auto* check_cmd = space_cmd->add_subcommand("check", "parse and validate a space file");
    check_cmd->add_option("file", space_file, "space DSL file")->required();
    auto* sample_cmd = space_cmd->add_subcommand("sample", "print random configurations");
    sample_cmd->add_option("file", space_file, "space DSL file")->required();
    sample_cmd->add_option("--n", sample_n, "number of samples");
    space_cmd->require_subcommand(1);

    auto* scan_cmd = app.add_subcommand("scan", "crash-scan a draft space and propose refinements");
    size_t scan_n = 100'000;
    scan_cmd->add_option("--n", scan_n, "configurations to sample (default 100000)");

    auto* tune_cmd = app.add_subcommand("tune", "run a configuration campaign");
    int tune_runs = 25;
    std::string strategy = "smbo";
    tune_cmd->add_option("--runs", tune_runs, "independent configurator runs (default 25)");
    tune_cmd->add_option("--strategy", strategy, "smbo or random")
        ->check(CLI::IsMember({"smbo", "random"}));

    auto* validate_cmd = app.add_subcommand("validate", "validate configurations against the default");
    std::vector<std::string> config_files;
    int runs_per_instance = 100;
    int load_level = 0;
    validate_cmd->add_option("configs", config_files, "configuration files (canonical form)");
    validate_cmd->add_option("--runs-per-instance", runs_per_instance,
                             "validation runs per (configuration, instance), default 100");
    validate_cmd->add_option("--load", load_level, "concurrency limit for this table");

    auto* rank_cmd = app.add_subcommand("rank", "rank configurations by validation score");
    std::string table_file;
    int top = 10;
    rank_cmd->add_option("--table", table_file, "validation.csv produced by validate")->required();
    rank_cmd->add_option("--top", top, "rows to report (default 10)");

    auto* ablate_cmd = app.add_subcommand("ablate", "greedy default-to-target ablation analysis");
    std::string target_file, from_file;
    std::vector<std::string> ablate_instances;
    int runs_per_eval = 10;
    ablate_cmd->add_option("--to", target_file, "target configuration file")->required();
    ablate_cmd->add_option("--from", from_file, "start configuration file (default: space default)");
    ablate_cmd->add_option("--instances", ablate_instances, "instance subset (default: all)");
    ablate_cmd->add_option("--runs-per-eval", runs_per_eval,
                           "runs per instance per evaluation (default 10)");

    auto* plot_cmd = app.add_subcommand("plot-data", "emit plot data files");
    std::string kind, log_file, traj_file, default_id;
    plot_cmd->add_option("--kind", kind, "ecdf, scatter, or trajectory")
        ->required()
        ->check(CLI::IsMember({"ecdf", "scatter", "trajectory"}));
    plot_cmd->add_option("--log", log_file, "runlog.ndjson to read");
    plot_cmd->add_option("--traj", traj_file, "trajectory file (kind=trajectory)");
    plot_cmd->add_option("--default-id", default_id, "default configuration id for scatter");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1
    }

    try {
        if (check_cmd->parsed()) return cmd_space_check(space_file);
        if (sample_cmd->parsed()) return cmd_space_sample(space_file, sample_n, g.seed);
        if (scan_cmd->parsed()) return cmd_scan(g, scan_n);
        if (tune_cmd->parsed()) return cmd_tune(g, tune_runs, strategy);
        if (validate_cmd->parsed())
            return cmd_validate(g, config_files, runs_per_instance, load_level);
        if (rank_cmd->parsed()) return cmd_rank(g, table_file, top);
        if (ablate_cmd->parsed())
            return cmd_ablate(g, target_file, from_file, ablate_instances, runs_per_eval);
        if (plot_cmd->parsed()) return cmd_plot_data(g, kind, log_file, traj_file, default_id);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const HarnessError& ex) {
        std::cerr << "harness error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
