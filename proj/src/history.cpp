#include "partune/history.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace partune {

void RunHistory::append(const RunResult& result, const ObjectiveSpec& spec) {
    size_t idx = runs_.size();
    runs_.push_back(result);
    const std::string& id = result.spec.config.id();
    by_config_[id].push_back(idx);
    by_config_instance_[{id, result.spec.instance}].push_back(idx);
    consumed_cost_ += run_cost(result, spec);
}

void RunHistory::append_all(const std::vector<RunResult>& results, const ObjectiveSpec& spec) {
    for (const RunResult& r : results) append(r, spec);
}

std::vector<const RunResult*> RunHistory::runs_of(const std::string& config_id) const {
    std::vector<const RunResult*> out;
    auto it = by_config_.find(config_id);
    if (it == by_config_.end()) return out;
    out.reserve(it->second.size());
    for (size_t idx : it->second) out.push_back(&runs_[idx]);
    return out;
}

std::vector<const RunResult*> RunHistory::runs_of(const std::string& config_id,
                                                  const std::string& instance) const {
    std::vector<const RunResult*> out;
    auto it = by_config_instance_.find({config_id, instance});
    if (it == by_config_instance_.end()) return out;
    out.reserve(it->second.size());
    for (size_t idx : it->second) out.push_back(&runs_[idx]);
    return out;
}

std::vector<std::pair<std::string, uint64_t>> RunHistory::pairs_of(
    const std::string& config_id) const {
    std::vector<std::pair<std::string, uint64_t>> pairs;
    std::set<std::pair<std::string, uint64_t>> seen;
    auto it = by_config_.find(config_id);
    if (it == by_config_.end()) return pairs;
    for (size_t idx : it->second) {
        std::pair<std::string, uint64_t> key{runs_[idx].spec.instance, runs_[idx].spec.seed};
        if (seen.insert(key).second) pairs.push_back(std::move(key));
    }
    return pairs;
}

bool RunHistory::has_pair(const std::string& config_id, const std::string& instance,
                          uint64_t seed) const {
    auto it = by_config_instance_.find({config_id, instance});
    if (it == by_config_instance_.end()) return false;
    for (size_t idx : it->second)
        if (runs_[idx].spec.seed == seed) return true;
    return false;
}

double RunHistory::par_on_pairs(const std::string& config_id,
                                const std::vector<std::pair<std::string, uint64_t>>& pairs,
                                const ObjectiveSpec& spec) const {
    if (pairs.empty()) throw std::invalid_argument("par_on_pairs over an empty pair set");
    double sum = 0;
    for (const auto& [instance, seed] : pairs) {
        auto it = by_config_instance_.find({config_id, instance});
        const RunResult* found = nullptr;
        if (it != by_config_instance_.end()) {
            for (size_t idx : it->second) {
                if (runs_[idx].spec.seed == seed) {
                    found = &runs_[idx];
                    break;  // first run of the pair is the scored one
                }
            }
        }
        if (!found)
            throw std::invalid_argument("configuration " + config_id + " has no run on (" + instance +
                                        ", " + std::to_string(seed) + ")");
        sum += par_contribution(*found, spec);
    }
    return sum / static_cast<double>(pairs.size());
}

void RunHistory::record_incumbent(const std::string& config_id, double training_score) {
    if (!trajectory_.empty() && training_score > trajectory_.back().training_par_k)
        throw std::logic_error("trajectory scores must be non-increasing");
    trajectory_.push_back({consumed_cost_, config_id, training_score, runs_.size()});
}

std::string RunHistory::trajectory_csv() const {
    std::ostringstream out;
    out << "elapsed_seconds,config_id,training_par_k,n_runs\n";
    for (const TrajectoryPoint& p : trajectory_) {
        out << render_value(Value{p.elapsed_s}) << ',' << p.config_id << ','
            << render_value(Value{p.training_par_k}) << ',' << p.n_runs << '\n';
    }
    return out.str();
}

}  // namespace partune
