#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "partune/scenario.hpp"
#include "partune/space.hpp"

namespace partune {

enum class Outcome { Success, Timeout, Crash, HarnessError };

std::string to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct RunSpec {
    Configuration config;
    std::string instance;
    uint64_t seed = 0;
};

struct RunResult {
    RunSpec spec;
    Outcome outcome = Outcome::HarnessError;
    double measured_s = 0;               // child CPU seconds (user + system)
    std::optional<double> reported;      // last "RESULT: <decimal>" on stdout
    int exit_code = -1;
    std::optional<int> term_signal;
    double wall_s = 0;
    int64_t timestamp_ms = 0;            // run start, epoch ms
    int load_tag = 1;                    // concurrency limit in force
    std::string error;                   // harness-error detail
};

// Expands the scenario's command template for one run. {params} becomes one
// --NAME=VALUE argument per active parameter in canonical (name-sorted) order;
// {param:NAME}, {instance} and {seed} substitute textually. Instance content
// is never shell-interpreted.
std::vector<std::string> render_command(const ScenarioSpec& scenario, const RunSpec& spec);

// Runs the target once under the scenario's CPU cutoff and wall guard.
// Spawn failures come back as Outcome::HarnessError with `error` set; they are
// never classified as CRASH.
RunResult execute_run(const ScenarioSpec& scenario, const RunSpec& spec, int load_tag = 1);

// Runs a batch with at most `scenario.jobs` children alive at once. Results
// come back in request order, each tagged with the concurrency limit.
std::vector<RunResult> run_batch(const ScenarioSpec& scenario, const std::vector<RunSpec>& specs);
std::vector<RunResult> run_batch(const ScenarioSpec& scenario, const std::vector<RunSpec>& specs,
                                 int concurrency_limit);

// Append-only NDJSON run log.
void append_run_log(const std::filesystem::path& path, const std::vector<RunResult>& results);
std::vector<RunResult> read_run_log(const std::filesystem::path& path, const ParameterSpace& space);

}  // namespace partune
