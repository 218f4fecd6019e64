#include <doctest.h>

#include <cmath>
#include <functional>

#include "partune/refine.hpp"
#include "partune/runner.hpp"
#include "support/test_support.hpp"

using namespace partune;
using testsupport::stub_scenario;

namespace {

const char* kCrashSpace =
    "a {true, false} [false]\n"
    "b {true, false} [false]\n"
    "c {true, false} [false]\n"
    "x integer [0, 1000] [500]\n";

bool holds(const Configuration& c, const char* name, const char* value) {
    const Value* v = c.find(name);
    return v && *v == Value{std::string(value)};
}

// synthetic report: crashes are exactly the configurations matching `crashes_iff`
CrashReport synthetic_report(const ParameterSpace& space, size_t n,
                             const std::function<bool(const Configuration&)>& crashes_iff) {
    CrashReport report;
    report.sampled = n;
    report.canary = "synthetic";
    for (size_t i = 0; i < n; ++i) {
        Configuration c = sample_random(space, i);
        (crashes_iff(c) ? report.crashing : report.non_crashing).push_back(std::move(c));
    }
    report.crash_rate = static_cast<double>(report.crashing.size()) / static_cast<double>(n);
    return report;
}

}  // namespace

TEST_CASE("crash_scan: the synthetic target is its own oracle") {
    ScenarioSpec sc = stub_scenario(kCrashSpace, {"crash-if-ab"}, 60,
                                    ObjectiveSource::CpuTime, 2);
    sc.canary = "crash-if-ab";
    CrashReport report = crash_scan(sc, sc.space, 200, 99);
    CHECK(report.sampled == 200);
    CHECK(report.crashing.size() + report.non_crashing.size() == 200);
    CHECK(report.crash_rate == doctest::Approx(0.25).epsilon(0.45));
    for (const Configuration& c : report.crashing) {
        CHECK(holds(c, "a", "true"));
        CHECK(holds(c, "b", "true"));
    }
    for (const Configuration& c : report.non_crashing) {
        bool both = holds(c, "a", "true") && holds(c, "b", "true");
        CHECK_FALSE(both);
    }

    // deterministic configuration sequence given the seed
    CrashReport again = crash_scan(sc, sc.space, 200, 99);
    REQUIRE(again.crashing.size() == report.crashing.size());
    for (size_t i = 0; i < report.crashing.size(); ++i)
        CHECK(again.crashing[i] == report.crashing[i]);
}

TEST_CASE("crash_scan: never-crashing target gives rate 0 and an empty list") {
    ScenarioSpec sc = stub_scenario(kCrashSpace, {"result:1.0"}, 60, ObjectiveSource::CpuTime, 2);
    sc.canary = "result:1.0";
    CrashReport report = crash_scan(sc, sc.space, 50, 3);
    CHECK(report.crashing.empty());
    CHECK(report.crash_rate == doctest::Approx(0.0));
    CHECK_THROWS_AS(propose_refinements(sc.space, report, report.non_crashing),
                    std::invalid_argument);
}

TEST_CASE("propose_refinements: exact pair clause with support 1.0 and no false positives") {
    auto space = parse_space(kCrashSpace);
    CrashReport report = synthetic_report(space, 400, [](const Configuration& c) {
        return holds(c, "a", "true") && holds(c, "b", "true");
    });
    REQUIRE(report.crashing.size() > 20);

    auto proposals = propose_refinements(space, report, report.non_crashing);
    REQUIRE(!proposals.empty());
    const RefinementProposal& top = proposals.front();
    CHECK(top.kind == RefinementProposal::Kind::ForbiddenClauseProposal);
    REQUIRE(top.clause.assignments.size() == 2);
    CHECK(top.clause.assignments[0] == std::pair<std::string, Value>{"a", Value{std::string("true")}});
    CHECK(top.clause.assignments[1] == std::pair<std::string, Value>{"b", Value{std::string("true")}});
    CHECK(top.support == doctest::Approx(1.0));
    CHECK(top.false_positive == doctest::Approx(0.0));

    // singletons like {a=true} explain all crashes but exclude too many clean
    // configurations; the false-positive gate must have removed them
    for (const RefinementProposal& p : proposals)
        if (p.kind == RefinementProposal::Kind::ForbiddenClauseProposal)
            CHECK(p.clause.assignments.size() == 2);

    // determinism
    auto again = propose_refinements(space, report, report.non_crashing);
    REQUIRE(again.size() == proposals.size());
    for (size_t i = 0; i < proposals.size(); ++i)
        CHECK(again[i].describe() == proposals[i].describe());
}

TEST_CASE("propose_refinements: threshold cut recovers the crashing tail") {
    auto space = parse_space(kCrashSpace);
    CrashReport report = synthetic_report(space, 600, [](const Configuration& c) {
        return std::get<int64_t>(*c.find("x")) > 900;
    });
    REQUIRE(report.crashing.size() > 20);

    auto proposals = propose_refinements(space, report, report.non_crashing);
    REQUIRE(!proposals.empty());
    bool found = false;
    for (const RefinementProposal& p : proposals) {
        if (p.kind != RefinementProposal::Kind::DomainReduction) continue;
        CHECK(p.parameter == "x");
        CHECK(std::get<int64_t>(p.new_lo) == 0);
        CHECK(std::get<int64_t>(p.new_hi) == 900);
        CHECK(p.support == doctest::Approx(1.0));
        CHECK(p.false_positive == doctest::Approx(0.0));
        found = true;
    }
    CHECK(found);
}

TEST_CASE("propose_refinements: support bound is literal and the default survives") {
    auto space = parse_space(kCrashSpace);
    // noisy crash pattern: a=true&&b=true always crashes, plus a few stray
    // crashes that no clause can explain
    CrashReport report = synthetic_report(space, 500, [](const Configuration& c) {
        bool core = holds(c, "a", "true") && holds(c, "b", "true");
        bool stray = std::get<int64_t>(*c.find("x")) % 97 == 0;
        return core || stray;
    });
    REQUIRE(report.crashing.size() > 20);
    auto proposals = propose_refinements(space, report, report.non_crashing);

    const Configuration defaults = default_config(space);
    const size_t min_hits =
        static_cast<size_t>(std::ceil(0.9 * static_cast<double>(report.crashing.size())));
    for (const RefinementProposal& p : proposals) {
        CHECK(p.support >= 0.9);
        CHECK(p.false_positive <= 0.05);
        if (p.kind == RefinementProposal::Kind::ForbiddenClauseProposal) {
            size_t hits = 0;
            for (const Configuration& c : report.crashing) {
                bool all = true;
                for (const auto& [name, v] : p.clause.assignments) {
                    const Value* cv = c.find(name);
                    all = all && cv && *cv == v;
                }
                hits += all ? 1 : 0;
            }
            CHECK(hits >= min_hits);
        }
    }

    // applying every proposal keeps the default configuration valid
    ParameterSpace refined = apply_proposals(space, proposals);
    CHECK_NOTHROW(default_config(refined));
    CHECK_NOTHROW(validate_config(refined, default_config(refined).values()));
    // and the refined space still parses back from its rendering
    CHECK(parse_space(render_space(refined)) == refined);
}

TEST_CASE("render_proposal_report includes counts and thresholds") {
    auto space = parse_space(kCrashSpace);
    CrashReport report = synthetic_report(space, 100, [](const Configuration& c) {
        return holds(c, "a", "true") && holds(c, "b", "true");
    });
    auto proposals = propose_refinements(space, report, report.non_crashing);
    std::string text = render_proposal_report(report, proposals);
    CHECK(text.find("crash scan:") != std::string::npos);
    CHECK(text.find("support=1") != std::string::npos);
    CHECK(text.find("{a=true, b=true}") != std::string::npos);
}
