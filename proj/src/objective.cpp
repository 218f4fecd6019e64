#include "partune/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "partune/history.hpp"

namespace partune {

double par_contribution(const RunResult& r, const ObjectiveSpec& spec) {
    switch (r.outcome) {
        case Outcome::Success:
            return spec.source == ObjectiveSource::ReportedMetric && r.reported ? *r.reported
                                                                                : r.measured_s;
        case Outcome::Timeout:
        case Outcome::Crash:
            return spec.k * spec.cutoff_s;
        case Outcome::HarnessError:
            throw std::invalid_argument("harness error has no PAR contribution");
    }
    throw std::invalid_argument("unknown outcome");
}

double run_cost(const RunResult& r, const ObjectiveSpec& spec) {
    if (r.outcome == Outcome::HarnessError) return 0;
    if (spec.source == ObjectiveSource::ReportedMetric)
        return r.outcome == Outcome::Success && r.reported ? *r.reported : spec.cutoff_s;
    return r.measured_s;
}

double par_score(const std::vector<RunResult>& results, const ObjectiveSpec& spec) {
    if (results.empty()) throw std::invalid_argument("par_score over an empty run list");
    double sum = 0;
    for (const RunResult& r : results) {
        if (r.outcome == Outcome::HarnessError)
            throw std::invalid_argument("par_score over a run list containing a harness error: " +
                                        r.error);
        sum += par_contribution(r, spec);
    }
    return sum / static_cast<double>(results.size());
}

std::string ScoreReport::csv() const {
    std::ostringstream out;
    out << "config_id,instance,par_k,n_success,n_timeout,n_crash\n";
    for (const auto& [instance, s] : per_instance) {
        out << config_id << ',' << instance << ',' << render_value(Value{s.par_k}) << ','
            << s.n_success << ',' << s.n_timeout << ',' << s.n_crash << '\n';
    }
    return out.str();
}

ScoreReport aggregate_score(const RunHistory& history, const Configuration& config,
                            const std::vector<std::string>& instances, const ObjectiveSpec& spec) {
    ScoreReport report;
    report.config_id = config.id();
    double pooled_sum = 0;
    size_t pooled_n = 0;
    for (const std::string& instance : instances) {
        auto runs = history.runs_of(config.id(), instance);
        if (runs.empty())
            throw std::invalid_argument("no runs of configuration " + config.id() + " on instance '" +
                                        instance + "'");
        InstanceScore s;
        double sum = 0;
        for (const RunResult* r : runs) {
            sum += par_contribution(*r, spec);
            switch (r->outcome) {
                case Outcome::Success: ++s.n_success; break;
                case Outcome::Timeout: ++s.n_timeout; break;
                case Outcome::Crash: ++s.n_crash; break;
                case Outcome::HarnessError: break;  // par_contribution throws first
            }
        }
        s.par_k = sum / static_cast<double>(runs.size());
        pooled_sum += sum;
        pooled_n += runs.size();
        report.n_success += s.n_success;
        report.n_timeout += s.n_timeout;
        report.n_crash += s.n_crash;
        report.per_instance.emplace(instance, s);
    }
    report.overall = pooled_sum / static_cast<double>(pooled_n);
    return report;
}

double relative_improvement(double default_score, double configured_score) {
    if (!(default_score > 0)) throw std::invalid_argument("default score must be positive");
    return 100.0 * (default_score - configured_score) / default_score;
}

std::vector<std::pair<double, double>> ecdf(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("ecdf over an empty sample");
    for (double t : times)
        if (t < 0) throw std::invalid_argument("ecdf over a negative time");
    std::vector<double> sorted(times);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> steps;
    const double n = static_cast<double>(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;  // merge ties
        steps.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return steps;
}

}  // namespace partune
