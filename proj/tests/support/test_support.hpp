#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "partune/scenario.hpp"

namespace testsupport {

inline std::string fakebench_path() { return FAKEBENCH_PATH; }

// Scenario driving the fakebench stub; instances are fakebench mode strings.
inline partune::ScenarioSpec stub_scenario(const std::string& space_text,
                                           std::vector<std::string> instances, double cutoff_s = 60,
                                           partune::ObjectiveSource objective =
                                               partune::ObjectiveSource::ReportedMetric,
                                           int jobs = 2) {
    partune::ScenarioSpec sc;
    sc.space = partune::parse_space(space_text);
    sc.space_path = "<inline>";
    sc.command_template = fakebench_path() + " {instance} {seed} {params}";
    sc.instances = std::move(instances);
    sc.cutoff_s = cutoff_s;
    sc.objective = objective;
    sc.jobs = jobs;
    return sc;
}

inline std::filesystem::path fresh_temp_dir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("partune-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsupport
