#include "partune/scenario.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "partune/errors.hpp"

namespace partune {

namespace {

// Every placeholder in the template must be one we know how to expand.
void check_template(const ScenarioSpec& sc) {
    const std::string& t = sc.command_template;
    if (t.empty()) throw ScenarioError("command template is empty");
    size_t pos = 0;
    while ((pos = t.find('{', pos)) != std::string::npos) {
        size_t end = t.find('}', pos);
        if (end == std::string::npos) throw ScenarioError("unterminated placeholder in command template");
        std::string ph = t.substr(pos + 1, end - pos - 1);
        if (ph == "params") {
            // must be a standalone token: it expands to multiple arguments
            bool lead_ok = pos == 0 || t[pos - 1] == ' ' || t[pos - 1] == '\t';
            bool trail_ok = end + 1 >= t.size() || t[end + 1] == ' ' || t[end + 1] == '\t';
            if (!lead_ok || !trail_ok)
                throw ScenarioError("{params} must stand alone as its own argument");
        } else if (ph != "instance" && ph != "seed" && ph.rfind("param:", 0) != 0) {
            throw ScenarioError("unrecognized placeholder {" + ph + "} in command template");
        }
        if (ph.rfind("param:", 0) == 0) {
            std::string name = ph.substr(6);
            if (!sc.space.find_parameter(name))
                throw ScenarioError("{param:" + name + "} names an unknown parameter");
        }
        pos = end + 1;
    }
}

}  // namespace

void ScenarioSpec::validate() const {
    if (instances.empty()) throw ScenarioError("instance list is empty");
    if (cutoff_s <= 0) throw ScenarioError("cutoff must be > 0");
    if (par_k < 1) throw ScenarioError("par_k must be >= 1");
    if (jobs < 1) throw ScenarioError("jobs must be >= 1");
    if (wall_guard < 1.0) throw ScenarioError("wall_guard must be >= 1");
    if (!canary.empty()) {
        bool known = false;
        for (const auto& inst : instances) known = known || inst == canary;
        if (!known) throw ScenarioError("canary '" + canary + "' is not in the instance list");
    }
    check_template(*this);
}

ScenarioSpec ScenarioSpec::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError("cannot open scenario file '" + file.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ScenarioError("scenario '" + file.string() + "': " + ex.what());
    }

    const std::filesystem::path base = file.has_parent_path() ? file.parent_path() : ".";
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
    };
    // instances may be files (resolved against the scenario) or opaque ids
    auto resolve_instance = [&](const std::string& p) {
        if (std::filesystem::path(p).is_absolute()) return p;
        std::string resolved = resolve(p);
        return std::filesystem::exists(resolved) ? resolved : p;
    };

    ScenarioSpec sc;
    try {
        sc.space_path = resolve(j.at("space").get<std::string>());
        sc.command_template = j.at("command").get<std::string>();
        for (const auto& inst : j.at("instances"))
            sc.instances.push_back(resolve_instance(inst.get<std::string>()));
        sc.cutoff_s = j.value("cutoff_s", 60.0);
        sc.par_k = j.value("par_k", 10);
        std::string obj = j.value("objective", std::string("cpu-time"));
        if (obj == "cpu-time")
            sc.objective = ObjectiveSource::CpuTime;
        else if (obj == "reported-metric")
            sc.objective = ObjectiveSource::ReportedMetric;
        else
            throw ScenarioError("objective must be 'cpu-time' or 'reported-metric'");
        sc.jobs = j.value("jobs", 1);
        sc.wall_guard = j.value("wall_guard", 2.0);
        if (j.contains("budget")) {
            const auto& b = j.at("budget");
            if (b.contains("runs")) sc.budget.runs = b.at("runs").get<size_t>();
            if (b.contains("seconds")) sc.budget.seconds = b.at("seconds").get<double>();
        }
        if (j.contains("env_scrub"))
            for (const auto& e : j.at("env_scrub")) sc.env_scrub.push_back(e.get<std::string>());
        if (j.contains("canary")) sc.canary = resolve_instance(j.at("canary").get<std::string>());
    } catch (const nlohmann::json::exception& ex) {
        throw ScenarioError("scenario '" + file.string() + "': " + ex.what());
    }

    sc.space = parse_space_file(sc.space_path);
    sc.validate();
    return sc;
}

}  // namespace partune
