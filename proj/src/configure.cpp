#include "partune/configure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partune {

namespace {

// seed stream tags
constexpr uint64_t kLadderStream = 0x4c41444445ull;
constexpr uint64_t kSampleStream = 0x53414d50ull;
constexpr uint64_t kModelStream = 0x4d4f44ull;
constexpr uint64_t kChallengerStream = 0x4348414cull;

void check_no_harness_error(const std::vector<RunResult>& results) {
    for (const RunResult& r : results)
        if (r.outcome == Outcome::HarnessError) throw HarnessError(r.error);
}

// Run `config` on the given ladder pairs it has not covered yet; appends to
// history and charges the budget. Returns false if the budget ran dry before
// all pairs could be admitted; admitted pairs always run.
bool run_on_pairs(RunHistory& history, const Configuration& config, const ScenarioSpec& scenario,
                  const ObjectiveSpec& spec,
                  const std::vector<std::pair<std::string, uint64_t>>& pairs,
                  BudgetTracker& budget) {
    std::vector<RunSpec> todo;
    bool complete = true;
    for (const auto& [instance, seed] : pairs) {
        if (history.has_pair(config.id(), instance, seed)) continue;
        if (budget.exhausted()) {
            complete = false;
            break;
        }
        todo.push_back({config, instance, seed});
        budget.on_run();
    }
    if (!todo.empty()) {
        auto results = run_batch(scenario, todo);
        check_no_harness_error(results);
        history.append_all(results, spec);
    }
    return complete;
}

double ei_of(const PerformanceModel& model, const Configuration& c, double f_star) {
    auto [mean, var] = model.predict(c);
    return expected_improvement(mean, var, f_star);
}

Configuration hill_climb(const PerformanceModel& model, const ParameterSpace& space,
                         Configuration current, double f_star) {
    double current_ei = ei_of(model, current, f_star);
    for (int step = 0; step < 200; ++step) {
        const Configuration* best = nullptr;
        double best_ei = current_ei;
        auto neighbours = neighbour_configs(space, current);
        for (const Configuration& n : neighbours) {
            double e = ei_of(model, n, f_star);
            if (e > best_ei || (best && e == best_ei && n.canonical() < best->canonical())) {
                best_ei = e;
                best = &n;
            }
        }
        if (!best) break;  // no neighbour has higher EI
        current = *best;
        current_ei = best_ei;
    }
    return current;
}

}  // namespace

std::vector<Configuration> neighbour_configs(const ParameterSpace& space,
                                             const Configuration& config) {
    std::vector<Configuration> out;
    auto push = [&](const std::string& name, const Value& v) {
        if (auto flipped = flip_parameter(space, config, name, v))
            if (!(*flipped == config)) out.push_back(std::move(*flipped));
    };
    for (const auto& [name, value] : config.values()) {
        const Parameter& p = space.parameter(name);
        if (const auto* r = std::get_if<IntegerRange>(&p.domain)) {
            int64_t v = std::get<int64_t>(value);
            int64_t coarse = std::max<int64_t>(1, (r->hi - r->lo) / 20);
            for (int64_t delta : {int64_t{1}, coarse}) {
                for (int64_t cand : {v - delta, v + delta}) {
                    cand = std::clamp(cand, r->lo, r->hi);
                    if (cand != v) push(name, cand);
                }
            }
        } else if (const auto* rr = std::get_if<RealRange>(&p.domain)) {
            double v = std::get<double>(value);
            for (double frac : {0.05, 0.2}) {
                for (int sign : {-1, 1}) {
                    double cand;
                    if (rr->log_scale) {
                        double span = std::log10(rr->hi) - std::log10(rr->lo);
                        cand = std::pow(10.0, std::log10(v) + sign * frac * span);
                    } else {
                        cand = v + sign * frac * (rr->hi - rr->lo);
                    }
                    cand = std::clamp(cand, rr->lo, rr->hi);
                    if (cand != v) push(name, cand);
                }
            }
        } else {
            for (const std::string& cand : std::get<Categorical>(p.domain).values)
                if (cand != std::get<std::string>(value)) push(name, cand);
        }
    }
    return out;
}

std::vector<Configuration> select_challengers(const PerformanceModel& model,
                                              const ParameterSpace& space, int count,
                                              uint64_t rng_seed, double incumbent_score,
                                              int ei_pool) {
    if (count < 1) throw std::invalid_argument("challenger count must be >= 1");
    if (ei_pool < 1) throw std::invalid_argument("ei_pool must be >= 1");
    const int n_ei = (count + 1) / 2;
    const int n_random = count / 2;

    // shared pool of random starts, ranked by EI (ties: canonical order)
    struct Start {
        double ei;
        Configuration config;
    };
    std::vector<Start> pool;
    pool.reserve(static_cast<size_t>(ei_pool));
    for (int i = 0; i < ei_pool; ++i) {
        Configuration c = sample_random(space, derive_seed(rng_seed, 0x1000 + static_cast<uint64_t>(i)));
        pool.push_back({ei_of(model, c, incumbent_score), std::move(c)});
    }
    std::sort(pool.begin(), pool.end(), [](const Start& a, const Start& b) {
        return a.ei != b.ei ? a.ei > b.ei : a.config.canonical() < b.config.canonical();
    });

    std::vector<Configuration> ei_picks;
    std::set<std::string> seen;
    for (const Start& s : pool) {
        if (static_cast<int>(ei_picks.size()) >= n_ei) break;
        if (!seen.insert(s.config.canonical()).second) continue;
        Configuration climbed = hill_climb(model, space, s.config, incumbent_score);
        ei_picks.push_back(std::move(climbed));
    }
    // degenerate spaces can have fewer distinct starts than slots
    while (static_cast<int>(ei_picks.size()) < n_ei && !pool.empty())
        ei_picks.push_back(pool.front().config);

    std::vector<Configuration> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (i % 2 == 0)
            out.push_back(ei_picks[static_cast<size_t>(i / 2)]);
        else
            out.push_back(
                sample_random(space, derive_seed(rng_seed, 0x2000000 + static_cast<uint64_t>(i / 2))));
    }
    (void)n_random;
    return out;
}

Configuration intensify(RunHistory& history, const Configuration& incumbent,
                        const Configuration& challenger, const ScenarioSpec& scenario,
                        const ObjectiveSpec& spec, const SeedLadder& ladder, BudgetTracker& budget,
                        const ConfiguratorOptions& options) {
    auto inc_pairs = history.pairs_of(incumbent.id());
    if (inc_pairs.empty()) throw std::invalid_argument("incumbent has no runs");

    // the incumbent's evidence grows by one ladder step per intensification
    if (inc_pairs.size() < options.max_runs_per_config && !budget.exhausted()) {
        auto next = ladder.pair(inc_pairs.size());
        run_on_pairs(history, incumbent, scenario, spec, {next}, budget);
        inc_pairs = history.pairs_of(incumbent.id());
    }

    if (challenger == incumbent) return incumbent;

    size_t covered = 0;
    for (const auto& pr : inc_pairs) {
        if (!history.has_pair(challenger.id(), pr.first, pr.second)) break;
        ++covered;
    }
    while (covered < inc_pairs.size()) {
        size_t target = covered == 0 ? 1 : std::min(covered * 2, inc_pairs.size());
        std::vector<std::pair<std::string, uint64_t>> block(inc_pairs.begin() + covered,
                                                            inc_pairs.begin() + target);
        if (!run_on_pairs(history, challenger, scenario, spec, block, budget))
            return incumbent;  // budget dried up mid-race: keep the incumbent
        covered = target;
        std::vector<std::pair<std::string, uint64_t>> shared(inc_pairs.begin(),
                                                             inc_pairs.begin() + covered);
        double challenger_par = history.par_on_pairs(challenger.id(), shared, spec);
        double incumbent_par = history.par_on_pairs(incumbent.id(), shared, spec);
        if (challenger_par > incumbent_par) return incumbent;  // rejected
    }

    double challenger_par = history.par_on_pairs(challenger.id(), inc_pairs, spec);
    double incumbent_par = history.par_on_pairs(incumbent.id(), inc_pairs, spec);
    // promotion also requires beating the recorded trajectory floor, which
    // keeps the trajectory non-increasing even when the incumbent's own score
    // drifted upward as its run set grew
    double floor = history.trajectory().empty() ? std::numeric_limits<double>::infinity()
                                                : history.trajectory().back().training_par_k;
    if (challenger_par < incumbent_par && challenger_par < floor) {
        history.record_incumbent(challenger.id(), challenger_par);
        return challenger;
    }
    return incumbent;  // ties retain the incumbent
}

namespace {

ConfiguratorResult run_configurator(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                                    const BudgetSpec& budget_spec, uint64_t rng_seed,
                                    const ConfiguratorOptions& options, bool model_based) {
    if (budget_spec.runs && *budget_spec.runs < 1)
        throw std::invalid_argument("budget must allow at least one run (the default evaluation)");

    const ParameterSpace& space = scenario.space;
    BudgetTracker budget(budget_spec);
    RunHistory history;
    SeedLadder ladder(scenario.instances, derive_seed(rng_seed, kLadderStream));

    // the default configuration is always candidate #1
    Configuration incumbent = default_config(space);
    if (!run_on_pairs(history, incumbent, scenario, spec, {ladder.pair(0)}, budget))
        throw std::invalid_argument("budget exhausted before the default configuration was evaluated");
    history.record_incumbent(incumbent.id(),
                             history.par_on_pairs(incumbent.id(), history.pairs_of(incumbent.id()), spec));

    uint64_t sample_counter = 0;
    uint64_t iteration = 0;
    int stalled_iterations = 0;
    while (!budget.exhausted()) {
        size_t runs_before = budget.runs_used();
        std::vector<Configuration> challengers;
        if (model_based && history.distinct_configs() >= 2) {
            double f_star = history.par_on_pairs(incumbent.id(), history.pairs_of(incumbent.id()), spec);
            PerformanceModel model = [&] {
                ForestOptions fo = options.forest;
                fo.seed = derive_seed(rng_seed, kModelStream + iteration);
                return fit_model(space, history, spec, fo);
            }();
            challengers = select_challengers(model, space, options.challengers_per_iter,
                                             derive_seed(rng_seed, kChallengerStream + iteration),
                                             f_star, options.ei_pool);
        } else if (model_based) {
            for (int i = 0; i < options.challengers_per_iter; ++i)
                challengers.push_back(
                    sample_random(space, derive_seed(rng_seed, kSampleStream + sample_counter++)));
        } else {
            challengers.push_back(
                sample_random(space, derive_seed(rng_seed, kSampleStream + sample_counter++)));
        }
        for (const Configuration& challenger : challengers) {
            if (budget.exhausted()) break;
            incumbent = intensify(history, incumbent, challenger, scenario, spec, ladder, budget,
                                  options);
        }
        ++iteration;
        // tiny spaces can stop yielding fresh work long before a wall-clock
        // budget expires; treat a long run-free streak as exhaustion
        stalled_iterations = budget.runs_used() == runs_before ? stalled_iterations + 1 : 0;
        if (stalled_iterations >= 1000) break;
    }

    ConfiguratorResult result;
    result.training_score =
        history.par_on_pairs(incumbent.id(), history.pairs_of(incumbent.id()), spec);
    result.incumbent = std::move(incumbent);
    result.seed = rng_seed;
    result.budget_consumed = history.consumed_cost();
    result.runs_used = budget.runs_used();
    result.history = std::move(history);
    return result;
}

}  // namespace

ConfiguratorResult random_search(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                                 const BudgetSpec& budget, uint64_t rng_seed,
                                 const ConfiguratorOptions& options) {
    return run_configurator(scenario, spec, budget, rng_seed, options, false);
}

ConfiguratorResult smbo_configure(const ScenarioSpec& scenario, const ObjectiveSpec& spec,
                                  const BudgetSpec& budget, uint64_t rng_seed,
                                  const ConfiguratorOptions& options) {
    return run_configurator(scenario, spec, budget, rng_seed, options, true);
}

}  // namespace partune
