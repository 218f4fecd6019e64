#include <doctest.h>

#include <cmath>
#include <set>

#include "partune/rng.hpp"
#include "partune/space.hpp"

using namespace partune;

namespace {

const char* kToySpace = R"(# toy fixture
a {true, false} [true]
b {true, false} [false]
x integer [1, 10] [7]
y real [0.0, 1.0] [0.5]
mode {fast, slow, off} [fast]
y | x in {7}
{a=true, b=true}
)";

// Random-but-valid space generator for the property suites. Conditions only
// point from earlier declarations to later ones, which keeps them acyclic.
ParameterSpace random_space(uint64_t seed) {
    Rng rng(seed);
    std::vector<Parameter> params;
    size_t n = 2 + rng.next_index(5);
    for (size_t i = 0; i < n; ++i) {
        Parameter p;
        p.name = "p" + std::to_string(i);
        switch (rng.next_index(4)) {
            case 0: {
                int64_t lo = rng.next_int(-20, 20);
                int64_t hi = lo + rng.next_int(0, 40);
                p.domain = IntegerRange{lo, hi};
                p.default_value = rng.next_int(lo, hi);
                break;
            }
            case 1: {
                double lo = rng.next_real(0.1, 5.0);
                double hi = lo + rng.next_real(0.0, 10.0);
                bool log_scale = rng.next_index(2) == 0;
                p.domain = RealRange{lo, hi, log_scale};
                p.default_value = rng.next_real(lo, hi);
                break;
            }
            case 2:
                p.domain = Categorical{{"true", "false"}};
                p.default_value = std::string(rng.next_index(2) ? "true" : "false");
                break;
            default: {
                Categorical cat;
                size_t k = 2 + rng.next_index(3);
                for (size_t v = 0; v < k; ++v) cat.values.push_back("v" + std::to_string(v));
                p.default_value = cat.values[rng.next_index(k)];
                p.domain = std::move(cat);
                break;
            }
        }
        params.push_back(std::move(p));
    }

    std::vector<Condition> conditions;
    for (size_t child = 1; child < n; ++child) {
        if (rng.next_index(3) != 0) continue;
        size_t parent = rng.next_index(child);
        Condition c;
        c.child = params[child].name;
        c.parent = params[parent].name;
        // activate on the parent's default so chains exercise both branches
        if (rng.next_index(2) == 0)
            c.activating = {params[parent].default_value};
        else if (const auto* r = std::get_if<IntegerRange>(&params[parent].domain))
            c.activating = {Value{r->lo}};
        else if (const auto* rr = std::get_if<RealRange>(&params[parent].domain))
            c.activating = {Value{rr->lo}};
        else
            c.activating = {Value{std::get<Categorical>(params[parent].domain).values.front()}};
        conditions.push_back(std::move(c));
    }

    // forbidden clause over two categorical params, never matching the default
    std::vector<ForbiddenClause> forbidden;
    std::vector<size_t> cats;
    for (size_t i = 0; i < n; ++i)
        if (std::holds_alternative<Categorical>(params[i].domain)) cats.push_back(i);
    if (cats.size() >= 2 && rng.next_index(2) == 0) {
        ForbiddenClause cl;
        for (size_t pick : {cats[0], cats[1]}) {
            const auto& values = std::get<Categorical>(params[pick].domain).values;
            std::string v = values[rng.next_index(values.size())];
            if (v == std::get<std::string>(params[pick].default_value) && values.size() > 1)
                v = values[v == values[0] ? 1 : 0];
            cl.assignments.emplace_back(params[pick].name, v);
        }
        bool hits_default = true;
        for (const auto& [nm, v] : cl.assignments)
            for (const Parameter& p : params)
                if (p.name == nm && !(p.default_value == v)) hits_default = false;
        if (!hits_default) forbidden.push_back(std::move(cl));
    }
    return ParameterSpace(std::move(params), std::move(conditions), std::move(forbidden));
}

}  // namespace

TEST_CASE("parse_space: grammar basics") {
    auto space = parse_space("a {true, false} [true]");
    REQUIRE(space.parameters().size() == 1);
    CHECK(space.parameters()[0].is_boolean());
    CHECK(space.parameters()[0].default_value == Value{std::string("true")});

    auto two = parse_space("x integer [1, 10] [7]\ny real [0.0, 1.0] [0.5]\ny | x in {7}");
    CHECK(two.parameters().size() == 2);
    CHECK(two.conditions().size() == 1);

    auto logspace = parse_space("t real [0.001, 1000.0] [1.0] log");
    CHECK(std::get<RealRange>(logspace.parameters()[0].domain).log_scale);
}

TEST_CASE("parse_space: error classes carry line numbers") {
    CHECK_THROWS_AS(parse_space("x integer [10, 1] [5]"), SpaceParseError);
    try {
        parse_space("a {true, false} [true]\nx integer [10, 1] [5]");
    } catch (const SpaceParseError& ex) {
        CHECK(ex.line() == 2);
    }
    // unknown parameter in condition / clause
    CHECK_THROWS_AS(parse_space("x integer [1, 2] [1]\ny | z in {1}"), SpaceParseError);
    CHECK_THROWS_AS(parse_space("x integer [1, 2] [1]\n{q=1}"), SpaceParseError);
    // default outside domain
    CHECK_THROWS_AS(parse_space("x integer [1, 10] [11]"), SpaceParseError);
    // cyclic conditions
    CHECK_THROWS_AS(parse_space("a {true, false} [true]\nb {true, false} [true]\n"
                                "a | b in {true}\nb | a in {true}"),
                    SpaceParseError);
    // log scale with nonpositive lo
    CHECK_THROWS_AS(parse_space("r real [0.0, 1.0] [0.5] log"), SpaceParseError);
    // defaults violating a forbidden clause reject the space at parse time
    CHECK_THROWS_AS(parse_space("a {true, false} [true]\n{a=true}"), SpaceParseError);
    // multi-parent conditions are out of scope and rejected
    CHECK_THROWS_AS(parse_space("a {true, false} [true]\nb {true, false} [true]\n"
                                "c {true, false} [true]\nc | a in {true}\nc | b in {true}"),
                    SpaceParseError);
}

TEST_CASE("default_config honours activation") {
    auto space = parse_space("a {true, false} [true]");
    CHECK(default_config(space).canonical() == "a=true");

    auto chain = parse_space("x integer [1, 10] [7]\ny real [0.0, 1.0] [0.5]\ny | x in {7}");
    CHECK(default_config(chain).canonical() == "x=7 y=0.5");

    auto inactive = parse_space("x integer [1, 10] [3]\ny real [0.0, 1.0] [0.5]\ny | x in {7}");
    CHECK(default_config(inactive).canonical() == "x=3");
}

TEST_CASE("active_parameters: fixpoint of the activation relation") {
    auto flat = parse_space("a {true, false} [true]\nx integer [0, 5] [1]");
    auto active = active_parameters(flat, {{"a", Value{std::string("true")}}, {"x", Value{int64_t{1}}}});
    CHECK(active == std::set<std::string>{"a", "x"});

    const char* chain_text =
        "x {on, off} [on]\n"
        "y {on, off} [on]\n"
        "z {on, off} [on]\n"
        "y | x in {on}\n"
        "z | y in {on}\n";
    auto chain = parse_space(chain_text);
    auto all = active_parameters(chain, {{"x", Value{std::string("on")}},
                                         {"y", Value{std::string("on")}},
                                         {"z", Value{std::string("on")}}});
    CHECK(all == std::set<std::string>{"x", "y", "z"});
    auto cut = active_parameters(chain, {{"x", Value{std::string("off")}}});
    CHECK(cut == std::set<std::string>{"x"});

    CHECK_THROWS_AS(active_parameters(chain, {}), ConfigError);
}

TEST_CASE("active_parameters is monotone under condition removal") {
    for (uint64_t seed = 0; seed < 60; ++seed) {
        ParameterSpace space = random_space(seed);
        if (space.conditions().empty()) continue;
        Configuration sample = sample_random(space, seed * 31 + 1);
        ValueMap partial;  // covers every parameter so any condition may be dropped
        for (const Parameter& p : space.parameters()) {
            const Value* v = sample.find(p.name);
            partial.emplace(p.name, v ? *v : p.default_value);
        }
        auto before = active_parameters(space, partial);

        for (size_t drop = 0; drop < space.conditions().size(); ++drop) {
            std::vector<Condition> fewer = space.conditions();
            fewer.erase(fewer.begin() + static_cast<long>(drop));
            ParameterSpace reduced(space.parameters(), fewer, {});
            auto after = active_parameters(reduced, partial);
            for (const std::string& name : before) CHECK(after.count(name) == 1);
        }
    }
}

TEST_CASE("sample_random: repeatable, in-domain, rejection honours clauses") {
    auto space = parse_space(kToySpace);
    Configuration first = sample_random(space, 42);
    Configuration again = sample_random(space, 42);
    CHECK(first == again);

    const std::string a = "a", b = "b";
    for (uint64_t i = 0; i < 1000; ++i) {
        Configuration c = sample_random(space, i);
        CHECK_NOTHROW(validate_config(space, c.values()));
        bool both = c.find(a) && *c.find(a) == Value{std::string("true")} && c.find(b) &&
                    *c.find(b) == Value{std::string("true")};
        CHECK_FALSE(both);
    }

    // over-constrained: the only valid configuration is all-false, which
    // uniform sampling hits with probability 2^-20 per attempt
    std::vector<Parameter> params;
    std::vector<ForbiddenClause> clauses;
    for (int i = 0; i < 20; ++i) {
        Parameter p;
        p.name = "b" + std::to_string(i);
        p.domain = Categorical{{"true", "false"}};
        p.default_value = std::string("false");
        clauses.push_back(ForbiddenClause{{{p.name, Value{std::string("true")}}}});
        params.push_back(std::move(p));
    }
    ParameterSpace impossible(std::move(params), {}, std::move(clauses));
    CHECK_THROWS_AS(sample_random(impossible, 7), OverconstrainedSpaceError);
}

TEST_CASE("sample_random: uniform per domain (chi-square against uniform oracle)") {
    auto space = parse_space("v integer [0, 9] [0]");
    const int n = 10'000;
    std::vector<int> counts(10, 0);
    for (int i = 0; i < n; ++i) {
        Configuration c = sample_random(space, static_cast<uint64_t>(i));
        counts[static_cast<size_t>(std::get<int64_t>(*c.find("v")))] += 1;
    }
    double chi2 = 0;
    for (int k = 0; k < 10; ++k) {
        double freq = counts[static_cast<size_t>(k)] / static_cast<double>(n);
        CHECK(freq == doctest::Approx(0.1).epsilon(0.2));  // 0.1 +/- 0.02
        double expected = n / 10.0;
        chi2 += (counts[static_cast<size_t>(k)] - expected) * (counts[static_cast<size_t>(k)] - expected) /
                expected;
    }
    CHECK(chi2 < 27.88);  // chi-square df=9, p=0.001
}

TEST_CASE("sample_random: log-scaled reals are log-uniform") {
    auto space = parse_space("t real [0.01, 100.0] [1.0] log");
    int low_decades = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        double v = std::get<double>(*sample_random(space, static_cast<uint64_t>(i)).find("t"));
        REQUIRE(v >= 0.01);
        REQUIRE(v <= 100.0);
        if (v < 1.0) ++low_decades;  // half of log-space lies below 1.0
    }
    CHECK(low_decades == doctest::Approx(n / 2.0).epsilon(0.08));
}

TEST_CASE("validate_config: accepts the valid, rejects each error class distinctly") {
    auto space = parse_space(kToySpace);
    CHECK_NOTHROW(validate_config(space, default_config(space).values()));

    auto expect_kind = [&](const ValueMap& vm, ConfigError::Kind kind) {
        try {
            validate_config(space, vm);
            FAIL_CHECK("expected a ConfigError");
        } catch (const ConfigError& ex) {
            CHECK(ex.kind() == kind);
        }
    };

    ValueMap base = default_config(space).values();
    ValueMap out_of_domain = base;
    out_of_domain["x"] = int64_t{11};
    // x=11 also deactivates y, so drop y to isolate the domain error
    out_of_domain.erase("y");
    expect_kind(out_of_domain, ConfigError::Kind::OutOfDomain);

    ValueMap extra = base;
    extra["x"] = int64_t{3};  // y no longer active but still assigned
    expect_kind(extra, ConfigError::Kind::ExtraParameter);

    ValueMap missing = base;
    missing.erase("y");  // x=7 keeps y active
    expect_kind(missing, ConfigError::Kind::MissingParameter);

    ValueMap forbidden = base;
    forbidden["a"] = std::string("true");
    forbidden["b"] = std::string("true");
    expect_kind(forbidden, ConfigError::Kind::ForbiddenClauseHit);

    ValueMap unknown = base;
    unknown["nope"] = int64_t{1};
    expect_kind(unknown, ConfigError::Kind::ExtraParameter);
}

TEST_CASE("config_diff: symmetric difference with inactive markers") {
    auto space = parse_space("x integer [1, 10] [7]\ny real [0.0, 1.0] [0.5]\ny | x in {7}");
    Configuration with_y = validate_config(space, {{"x", int64_t{7}}, {"y", 0.5}});
    Configuration without_y = validate_config(space, {{"x", int64_t{3}}});

    CHECK(config_diff(space, with_y, with_y).empty());

    auto diff = config_diff(space, with_y, without_y);
    REQUIRE(diff.size() == 2);
    CHECK(diff[0].name == "x");
    CHECK(diff[0].from == Value{int64_t{7}});
    CHECK(diff[0].to == Value{int64_t{3}});
    CHECK(diff[1].name == "y");
    CHECK(diff[1].from == Value{0.5});
    CHECK_FALSE(diff[1].to.has_value());

    // default vs default-with-one-flip: exactly one entry
    auto boolspace = parse_space("a {true, false} [true]\nb {true, false} [false]");
    Configuration defaults = default_config(boolspace);
    Configuration flipped = validate_config(
        boolspace, {{"a", std::string("true")}, {"b", std::string("true")}});
    CHECK(config_diff(boolspace, defaults, flipped).size() == 1);

    auto other = parse_space("zzz integer [0, 1] [0]");
    CHECK_THROWS_AS(config_diff(other, with_y, without_y), ConfigError);
}

TEST_CASE("round-trip: parse(render(space)) is structurally equal") {
    auto toy = parse_space(kToySpace);
    CHECK(parse_space(render_space(toy)) == toy);

    for (uint64_t seed = 0; seed < 120; ++seed) {
        ParameterSpace space = random_space(seed);
        ParameterSpace reparsed = parse_space(render_space(space));
        CHECK(reparsed == space);
    }
}

TEST_CASE("canonical equality: equal serialization means equal and hash-equal") {
    auto space = parse_space(kToySpace);
    for (uint64_t seed = 0; seed < 40; ++seed) {
        Configuration a = sample_random(space, seed);
        Configuration b = validate_config(space, a.values());
        CHECK(a == b);
        CHECK(a.id() == b.id());
        CHECK(a.canonical() == b.canonical());
    }
}

TEST_CASE("every sample passes validate_config on fuzzed spaces") {
    for (uint64_t seed = 0; seed < 80; ++seed) {
        ParameterSpace space = random_space(seed);
        for (uint64_t draw = 0; draw < 10; ++draw) {
            Configuration c = sample_random(space, seed * 1000 + draw);
            CHECK_NOTHROW(validate_config(space, c.values()));
        }
    }
}

TEST_CASE("boolean domains collapse to one canonical form") {
    auto a = parse_space("flag {true, false} [false]");
    auto b = parse_space("flag {false, true} [false]");
    CHECK(a == b);
    CHECK(render_space(a) == render_space(b));
}
