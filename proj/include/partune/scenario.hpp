#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "partune/space.hpp"

namespace partune {

enum class ObjectiveSource { CpuTime, ReportedMetric };

// Configurator budget: whichever of the two limits trips first ends the run.
struct BudgetSpec {
    std::optional<size_t> runs;
    std::optional<double> seconds;  // wall clock
    bool unlimited() const { return !runs && !seconds; }
};

// One complete tuning job: what to run, on what, and under which limits.
struct ScenarioSpec {
    std::string space_path;
    ParameterSpace space;
    std::string command_template;       // {instance} {seed} {params} {param:NAME}
    std::vector<std::string> instances; // file paths or opaque identifiers
    double cutoff_s = 60.0;
    int par_k = 10;
    ObjectiveSource objective = ObjectiveSource::CpuTime;
    int jobs = 1;                       // concurrency limit
    double wall_guard = 2.0;            // wall cutoff = wall_guard * cutoff_s
    BudgetSpec budget;
    std::vector<std::string> env_scrub; // exact names, or trailing-'*' prefixes
    std::string canary;                 // instance used by crash scanning

    // Parses the JSON scenario file; relative paths resolve against its parent
    // directory. Validates every invariant and the command template.
    static ScenarioSpec load(const std::filesystem::path& file);
    void validate() const;
};

}  // namespace partune
