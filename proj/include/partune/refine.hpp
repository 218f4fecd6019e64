#pragma once

#include <string>
#include <vector>

#include "partune/scenario.hpp"
#include "partune/space.hpp"

namespace partune {

struct CrashReport {
    size_t sampled = 0;
    std::vector<Configuration> crashing;
    std::vector<Configuration> non_crashing;
    double crash_rate = 0;
    std::string canary;
};

struct RefinementProposal {
    enum class Kind { ForbiddenClauseProposal, DomainReduction };
    Kind kind = Kind::ForbiddenClauseProposal;
    ForbiddenClause clause;       // ForbiddenClauseProposal
    std::string parameter;        // DomainReduction
    Value new_lo, new_hi;         // DomainReduction
    double support = 0;           // fraction of crashes explained
    double false_positive = 0;    // fraction of non-crashing configs also excluded

    std::string describe() const;
};

struct RefineThresholds {
    double min_support = 0.9;
    double max_false_positive = 0.05;
};

// Samples n seed-derived random configurations, executes each on the canary
// instance through run_batch, and collects the crashes. Default n is 100000.
CrashReport crash_scan(const ScenarioSpec& scenario, const ParameterSpace& space, size_t n,
                       uint64_t rng_seed);

// Mines candidate forbidden clauses (single assignments and pairs over
// categorical parameters) and per-numeric-parameter threshold cuts from a
// crash report. Emits proposals with support >= 0.9 and false-positive <= 0.05
// that keep the default configuration valid, ranked by support descending then
// false-positive ascending.
std::vector<RefinementProposal> propose_refinements(const ParameterSpace& space,
                                                    const CrashReport& report,
                                                    const std::vector<Configuration>& non_crashing,
                                                    const RefineThresholds& thresholds = {});

// The patched space a human would review: all proposals applied to the draft.
ParameterSpace apply_proposals(const ParameterSpace& space,
                               const std::vector<RefinementProposal>& proposals);

std::string render_proposal_report(const CrashReport& report,
                                   const std::vector<RefinementProposal>& proposals);

}  // namespace partune
