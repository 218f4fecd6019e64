#include "partune/refine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "partune/runner.hpp"

namespace partune {

namespace {

bool satisfies(const Configuration& c, const std::vector<std::pair<std::string, Value>>& assignments) {
    for (const auto& [name, value] : assignments) {
        const Value* v = c.find(name);
        if (!v || !(*v == value)) return false;
    }
    return true;
}

struct Counted {
    size_t crash_hits = 0;
    size_t clean_hits = 0;
};

}  // namespace

std::string RefinementProposal::describe() const {
    std::ostringstream out;
    if (kind == Kind::ForbiddenClauseProposal) {
        out << "forbid " << clause.render();
    } else {
        out << "reduce " << parameter << " to [" << render_value(new_lo) << ", "
            << render_value(new_hi) << "]";
    }
    out << "  support=" << render_value(Value{support})
        << " false_positive=" << render_value(Value{false_positive});
    return out.str();
}

CrashReport crash_scan(const ScenarioSpec& scenario, const ParameterSpace& space, size_t n,
                       uint64_t rng_seed) {
    if (n < 1) throw std::invalid_argument("crash scan needs n >= 1");
    if (scenario.canary.empty())
        throw ScenarioError("crash scan needs a canary instance in the scenario");

    CrashReport report;
    report.sampled = n;
    report.canary = scenario.canary;

    std::vector<RunSpec> specs;
    specs.reserve(n);
    for (size_t i = 0; i < n; ++i)
        specs.push_back({sample_random(space, derive_seed(rng_seed, i)), scenario.canary,
                         derive_seed(rng_seed, 0xc0ffee + i)});

    std::vector<RunResult> results = run_batch(scenario, specs);
    for (const RunResult& r : results) {
        if (r.outcome == Outcome::HarnessError) throw HarnessError(r.error);
        if (r.outcome == Outcome::Crash)
            report.crashing.push_back(r.spec.config);
        else
            report.non_crashing.push_back(r.spec.config);
    }
    report.crash_rate = static_cast<double>(report.crashing.size()) / static_cast<double>(n);
    return report;
}

std::vector<RefinementProposal> propose_refinements(const ParameterSpace& space,
                                                    const CrashReport& report,
                                                    const std::vector<Configuration>& non_crashing,
                                                    const RefineThresholds& thresholds) {
    if (report.crashing.empty())
        throw std::invalid_argument("refinement mining needs at least one crash");

    const Configuration defaults = default_config(space);
    const double n_crash = static_cast<double>(report.crashing.size());
    const double n_clean = static_cast<double>(non_crashing.size());
    std::vector<RefinementProposal> proposals;

    // Candidate clauses: every categorical single assignment and pair observed
    // in a crashing configuration. A configuration satisfies such a clause iff
    // the clause appears among its own singletons/pairs, so one enumeration
    // pass per configuration does all the counting.
    using Assignment = std::pair<std::string, Value>;
    std::map<std::vector<Assignment>, Counted> clause_counts;
    auto enumerate = [&](const Configuration& c, bool crash) {
        std::vector<Assignment> cats;
        for (const auto& [name, value] : c.values())
            if (std::holds_alternative<Categorical>(space.parameter(name).domain))
                cats.emplace_back(name, value);
        auto bump = [&](std::vector<Assignment>&& key) {
            if (crash) {
                clause_counts[std::move(key)].crash_hits += 1;
            } else if (auto it = clause_counts.find(key); it != clause_counts.end()) {
                it->second.clean_hits += 1;
            }
        };
        for (size_t i = 0; i < cats.size(); ++i) {
            bump({cats[i]});
            for (size_t j = i + 1; j < cats.size(); ++j) bump({cats[i], cats[j]});
        }
    };
    for (const Configuration& c : report.crashing) enumerate(c, true);
    for (const Configuration& c : non_crashing) enumerate(c, false);
    for (const auto& [assignments, counts] : clause_counts) {
        double support = static_cast<double>(counts.crash_hits) / n_crash;
        double fp = n_clean == 0 ? 0 : static_cast<double>(counts.clean_hits) / n_clean;
        if (support < thresholds.min_support || fp > thresholds.max_false_positive) continue;
        if (satisfies(defaults, assignments)) continue;  // never exclude the default
        RefinementProposal p;
        p.kind = RefinementProposal::Kind::ForbiddenClauseProposal;
        p.clause.assignments = assignments;
        p.support = support;
        p.false_positive = fp;
        proposals.push_back(std::move(p));
    }

    // Numeric threshold cuts: one best upper and lower cut per range parameter.
    for (const Parameter& param : space.parameters()) {
        const bool integer = std::holds_alternative<IntegerRange>(param.domain);
        if (!integer && !std::holds_alternative<RealRange>(param.domain)) continue;

        std::vector<double> crash_vals, clean_vals;
        auto numeric = [&](const Value& v) {
            return integer ? static_cast<double>(std::get<int64_t>(v)) : std::get<double>(v);
        };
        for (const Configuration& c : report.crashing)
            if (const Value* v = c.find(param.name)) crash_vals.push_back(numeric(*v));
        for (const Configuration& c : non_crashing)
            if (const Value* v = c.find(param.name)) clean_vals.push_back(numeric(*v));
        if (crash_vals.empty()) continue;

        double default_val = numeric(param.default_value);
        double lo = integer ? static_cast<double>(std::get<IntegerRange>(param.domain).lo)
                            : std::get<RealRange>(param.domain).lo;
        double hi = integer ? static_cast<double>(std::get<IntegerRange>(param.domain).hi)
                            : std::get<RealRange>(param.domain).hi;

        std::vector<double> candidates = clean_vals;
        candidates.insert(candidates.end(), crash_vals.begin(), crash_vals.end());
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        // upper cut: shrink the domain to [lo, t], excluding values > t
        std::optional<RefinementProposal> best_upper, best_lower;
        for (double t : candidates) {
            if (t < default_val) continue;  // default must stay inside
            size_t crash_hits = 0, clean_hits = 0;
            for (double v : crash_vals) crash_hits += v > t ? 1 : 0;
            for (double v : clean_vals) clean_hits += v > t ? 1 : 0;
            double support = static_cast<double>(crash_hits) / n_crash;
            double fp = n_clean == 0 ? 0 : static_cast<double>(clean_hits) / n_clean;
            if (support < thresholds.min_support || fp > thresholds.max_false_positive) continue;
            if (t >= hi) continue;  // no reduction
            RefinementProposal p;
            p.kind = RefinementProposal::Kind::DomainReduction;
            p.parameter = param.name;
            p.new_lo = integer ? Value{static_cast<int64_t>(lo)} : Value{lo};
            p.new_hi = integer ? Value{static_cast<int64_t>(t)} : Value{t};
            p.support = support;
            p.false_positive = fp;
            if (!best_upper || support > best_upper->support ||
                (support == best_upper->support && fp < best_upper->false_positive))
                best_upper = std::move(p);
        }
        for (double t : candidates) {
            if (t > default_val) continue;
            size_t crash_hits = 0, clean_hits = 0;
            for (double v : crash_vals) crash_hits += v < t ? 1 : 0;
            for (double v : clean_vals) clean_hits += v < t ? 1 : 0;
            double support = static_cast<double>(crash_hits) / n_crash;
            double fp = n_clean == 0 ? 0 : static_cast<double>(clean_hits) / n_clean;
            if (support < thresholds.min_support || fp > thresholds.max_false_positive) continue;
            if (t <= lo) continue;
            RefinementProposal p;
            p.kind = RefinementProposal::Kind::DomainReduction;
            p.parameter = param.name;
            p.new_lo = integer ? Value{static_cast<int64_t>(t)} : Value{t};
            p.new_hi = integer ? Value{static_cast<int64_t>(hi)} : Value{hi};
            p.support = support;
            p.false_positive = fp;
            if (!best_lower || support > best_lower->support ||
                (support == best_lower->support && fp < best_lower->false_positive))
                best_lower = std::move(p);
        }
        if (best_upper) proposals.push_back(std::move(*best_upper));
        if (best_lower) proposals.push_back(std::move(*best_lower));
    }

    std::sort(proposals.begin(), proposals.end(),
              [](const RefinementProposal& a, const RefinementProposal& b) {
                  if (a.support != b.support) return a.support > b.support;
                  if (a.false_positive != b.false_positive) return a.false_positive < b.false_positive;
                  return a.describe() < b.describe();
              });
    return proposals;
}

ParameterSpace apply_proposals(const ParameterSpace& space,
                               const std::vector<RefinementProposal>& proposals) {
    std::vector<Parameter> params = space.parameters();
    std::vector<ForbiddenClause> forbidden = space.forbidden();
    for (const RefinementProposal& p : proposals) {
        if (p.kind == RefinementProposal::Kind::ForbiddenClauseProposal) {
            if (std::find(forbidden.begin(), forbidden.end(), p.clause) == forbidden.end())
                forbidden.push_back(p.clause);
            continue;
        }
        for (Parameter& param : params) {
            if (param.name != p.parameter) continue;
            if (auto* r = std::get_if<IntegerRange>(&param.domain)) {
                r->lo = std::get<int64_t>(p.new_lo);
                r->hi = std::get<int64_t>(p.new_hi);
            } else if (auto* rr = std::get_if<RealRange>(&param.domain)) {
                rr->lo = std::get<double>(p.new_lo);
                rr->hi = std::get<double>(p.new_hi);
            }
        }
    }
    return ParameterSpace(std::move(params), space.conditions(), std::move(forbidden));
}

std::string render_proposal_report(const CrashReport& report,
                                   const std::vector<RefinementProposal>& proposals) {
    std::ostringstream out;
    out << "crash scan: " << report.crashing.size() << " of " << report.sampled
        << " sampled configurations crashed on canary '" << report.canary
        << "' (rate " << render_value(Value{report.crash_rate}) << ")\n";
    if (proposals.empty()) {
        out << "no refinement proposals met the support/false-positive thresholds\n";
        return out.str();
    }
    out << "proposals (support desc, false-positive asc):\n";
    for (size_t i = 0; i < proposals.size(); ++i)
        out << "  " << (i + 1) << ". " << proposals[i].describe() << '\n';
    return out.str();
}

}  // namespace partune
