#include "partune/ablation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "partune/runner.hpp"

namespace partune {

namespace {

struct Candidate {
    std::string parameter;  // the single modification
    Configuration config;
};

std::vector<Candidate> candidates_detailed(const ParameterSpace& space, const Configuration& current,
                                           const Configuration& target) {
    if (current == target) throw std::invalid_argument("current equals target; nothing to ablate");
    std::vector<Candidate> out;
    for (const auto& [name, value] : current.values()) {
        const Value* target_value = target.find(name);
        if (!target_value || *target_value == value) continue;
        if (auto flipped = flip_parameter(space, current, name, *target_value, &target))
            out.push_back({name, std::move(*flipped)});
    }
    return out;
}

std::string render_opt(const std::optional<Value>& v) {
    return v ? render_value(*v) : std::string("inactive");
}

}  // namespace

std::vector<Configuration> ablation_candidates(const ParameterSpace& space,
                                               const Configuration& current,
                                               const Configuration& target) {
    std::vector<Configuration> out;
    for (Candidate& c : candidates_detailed(space, current, target)) out.push_back(std::move(c.config));
    return out;
}

AblationPath ablation_path(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                           const Configuration& default_config, const Configuration& target,
                           const std::vector<std::string>& instances, int runs_per_eval,
                           uint64_t rng_seed) {
    if (runs_per_eval < 1) throw std::invalid_argument("runs_per_eval must be >= 1");
    AblationPath path;
    path.instances = instances.empty() ? scenario.instances : instances;
    path.runs_per_eval = runs_per_eval;
    for (const std::string& inst : path.instances)
        if (std::find(scenario.instances.begin(), scenario.instances.end(), inst) ==
            scenario.instances.end())
            throw ScenarioError("ablation instance '" + inst + "' is not in the scenario");

    // matched (instance, seed) evaluation set, identical for every candidate
    std::map<std::string, double> cache;
    auto evaluate = [&](const Configuration& config) {
        auto it = cache.find(config.id());
        if (it != cache.end()) return it->second;
        std::vector<RunSpec> specs;
        for (const std::string& inst : path.instances)
            for (int j = 0; j < runs_per_eval; ++j)
                specs.push_back({config, inst, derive_seed(rng_seed, static_cast<uint64_t>(j))});
        std::vector<RunResult> results = run_batch(scenario, specs);
        for (const RunResult& r : results)
            if (r.outcome == Outcome::HarnessError) throw HarnessError(r.error);
        double score = par_score(results, spec);
        cache.emplace(config.id(), score);
        return score;
    };

    path.default_score = evaluate(default_config);
    path.target_score = default_config == target ? path.default_score : evaluate(target);
    const double denom = path.default_score - path.target_score;
    path.normalized = denom > 0;

    Configuration current = default_config;
    double previous_score = path.default_score;
    int round = 1;
    while (!(current == target)) {
        auto candidates = candidates_detailed(scenario.space, current, target);
        if (candidates.empty()) {
            path.stuck = true;
            break;
        }
        std::vector<RoundEvaluation> evals;
        const Candidate* best = nullptr;
        double best_score = 0;
        for (const Candidate& c : candidates) {
            double score = evaluate(c.config);
            evals.push_back({c.config.id(), c.parameter, score});
            if (!best || score < best_score ||
                (score == best_score && c.parameter < best->parameter)) {
                best = &c;
                best_score = score;
            }
        }
        path.round_evaluations.push_back(std::move(evals));

        AblationStep step;
        step.round = round++;
        step.parameter = best->parameter;
        if (const Value* v = current.find(best->parameter)) step.from = *v;
        if (const Value* v = best->config.find(best->parameter)) step.to = *v;
        step.score_after = best_score;
        step.portion = path.normalized ? 100.0 * (previous_score - best_score) / denom
                                       : previous_score - best_score;
        path.steps.push_back(std::move(step));

        current = best->config;
        previous_score = best_score;
    }
    return path;
}

std::string AblationPath::render_table() const {
    std::ostringstream out;
    const char* portion_header =
        normalized ? "approx. portion of rel. impr." : "score delta [s] (unnormalized)";
    out << "default score: " << render_value(Value{default_score})
        << "  target score: " << render_value(Value{target_score}) << '\n';
    if (!normalized)
        out << "warning: target is not better than default; portions are raw score deltas\n";
    if (stuck) out << "warning: path is stuck; every remaining single flip is forbidden\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %-28s %12s %12s  %s\n", "distance from default",
                  "parameter modified", "from", "to", portion_header);
    out << line;
    for (const AblationStep& s : steps) {
        char buf[32];
        if (normalized)
            std::snprintf(buf, sizeof buf, "%.1f%%", s.portion);
        else
            std::snprintf(buf, sizeof buf, "%.4f", s.portion);
        std::snprintf(line, sizeof line, "%-22d %-28s %12s %12s  %s\n", s.round, s.parameter.c_str(),
                      render_opt(s.from).c_str(), render_opt(s.to).c_str(), buf);
        out << line;
    }
    return out.str();
}

std::string AblationPath::csv() const {
    std::ostringstream out;
    out << "distance,parameter,from,to,score_after,portion\n";
    for (const AblationStep& s : steps) {
        out << s.round << ',' << s.parameter << ',' << render_opt(s.from) << ',' << render_opt(s.to)
            << ',' << render_value(Value{s.score_after}) << ',' << render_value(Value{s.portion})
            << '\n';
    }
    return out.str();
}

}  // namespace partune
