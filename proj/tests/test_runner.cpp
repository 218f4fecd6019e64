#include <doctest.h>

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>

#include "partune/runner.hpp"
#include "support/test_support.hpp"

using namespace partune;
using testsupport::stub_scenario;

namespace {

// Host calibration for the burn stub: spawn it bare and read the rusage meter.
double calibrate_burn(const std::string& mode) {
    pid_t pid = fork();
    if (pid == 0) {
        execl(testsupport::fakebench_path().c_str(), "fakebench", mode.c_str(), "0",
              static_cast<char*>(nullptr));
        _exit(127);
    }
    int status = 0;
    rusage ru{};
    wait4(pid, &status, 0, &ru);
    return static_cast<double>(ru.ru_utime.tv_sec) + ru.ru_utime.tv_usec * 1e-6 +
           static_cast<double>(ru.ru_stime.tv_sec) + ru.ru_stime.tv_usec * 1e-6;
}

}  // namespace

TEST_CASE("render_command: placeholder expansion") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"bench.js"});
    sc.command_template = "engine {params} {instance}";
    RunSpec spec{default_config(sc.space), "bench.js", 7};
    auto argv = render_command(sc, spec);
    REQUIRE(argv.size() == 3);
    CHECK(argv[0] == "engine");
    CHECK(argv[1] == "--a=true");
    CHECK(argv[2] == "bench.js");

    sc.command_template = "engine --seed={seed} {instance}";
    spec.seed = 42;
    argv = render_command(sc, spec);
    CHECK(argv[1] == "--seed=42");

    sc.command_template = "engine {param:a} {instance}";
    argv = render_command(sc, spec);
    CHECK(argv[1] == "true");

    sc.command_template = "engine {param:missing}";
    CHECK_THROWS_AS(render_command(sc, spec), ScenarioError);

    // canonical order of {params} over several parameters
    ScenarioSpec multi = stub_scenario("b integer [0, 5] [2]\na {true, false} [false]", {"i"});
    multi.command_template = "run {params}";
    auto margv = render_command(multi, RunSpec{default_config(multi.space), "i", 0});
    REQUIRE(margv.size() == 3);
    CHECK(margv[1] == "--a=false");
    CHECK(margv[2] == "--b=2");
}

TEST_CASE("render_command: inactive {param:NAME} is an error") {
    ScenarioSpec sc = stub_scenario("x integer [1, 10] [3]\ny real [0.0, 1.0] [0.5]\ny | x in {7}",
                                    {"i"});
    sc.command_template = "engine {param:y}";
    RunSpec spec{default_config(sc.space), "i", 0};  // x=3, y inactive
    CHECK_THROWS_AS(render_command(sc, spec), ScenarioError);
}

TEST_CASE("execute_run: success with calibrated CPU metering") {
    double calibrated = calibrate_burn("burn:0.2");
    CHECK(calibrated > 0.1);

    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"burn:0.2"}, 60,
                                    ObjectiveSource::CpuTime);
    RunResult r = execute_run(sc, {default_config(sc.space), "burn:0.2", 1});
    CHECK(r.outcome == Outcome::Success);
    CHECK(r.exit_code == 0);
    CHECK(r.measured_s == doctest::Approx(0.2).epsilon(0.5));
    CHECK(r.measured_s == doctest::Approx(calibrated).epsilon(0.6));
    CHECK(r.measured_s < sc.cutoff_s);
    CHECK(r.reported.has_value());
}

TEST_CASE("execute_run: CPU cutoff classifies TIMEOUT with measured >= cutoff") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"spin"}, 1.0);
    RunResult r = execute_run(sc, {default_config(sc.space), "spin", 1});
    CHECK(r.outcome == Outcome::Timeout);
    CHECK(r.measured_s >= sc.cutoff_s);
    CHECK(r.measured_s <= sc.wall_guard * sc.cutoff_s);
}

TEST_CASE("execute_run: wall guard catches IO-bound hangs the CPU meter misses") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"sleep:5"}, 0.5);
    sc.wall_guard = 2.0;  // wall limit 1 s
    auto start = std::chrono::steady_clock::now();
    RunResult r = execute_run(sc, {default_config(sc.space), "sleep:5", 1});
    double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.outcome == Outcome::Timeout);
    CHECK(r.measured_s >= sc.cutoff_s);  // closed at the cutoff
    CHECK(r.measured_s <= sc.wall_guard * sc.cutoff_s);
    CHECK(waited < 4.5);  // killed well before the sleep finished
}

TEST_CASE("execute_run: nonzero exit is CRASH") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"exit:3"});
    RunResult r = execute_run(sc, {default_config(sc.space), "exit:3", 1});
    CHECK(r.outcome == Outcome::Crash);
    CHECK(r.exit_code == 3);
}

TEST_CASE("execute_run: spawn failure is a harness error, never a CRASH") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"i"});
    sc.command_template = "/nonexistent/binary {instance} {seed}";
    RunResult r = execute_run(sc, {default_config(sc.space), "i", 1});
    CHECK(r.outcome == Outcome::HarnessError);
    CHECK(!r.error.empty());
}

TEST_CASE("execute_run: reported metric parsing and the malformed-harness rule") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"result:2.75"}, 60,
                                    ObjectiveSource::ReportedMetric);
    RunResult r = execute_run(sc, {default_config(sc.space), "result:2.75", 1});
    CHECK(r.outcome == Outcome::Success);
    REQUIRE(r.reported.has_value());
    CHECK(*r.reported == doctest::Approx(2.75));

    // exit 0 without a RESULT line is a malformed harness: CRASH
    ScenarioSpec noisy = stub_scenario("a {true, false} [true]", {"count:/tmp"}, 60,
                                       ObjectiveSource::ReportedMetric);
    noisy.command_template = "/bin/true {instance} {seed}";
    RunResult bad = execute_run(noisy, {default_config(noisy.space), "count:/tmp", 1});
    CHECK(bad.outcome == Outcome::Crash);
}

TEST_CASE("run_batch: order-preserving pairing and load tags") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"i"});
    std::vector<RunSpec> specs;
    for (int i = 0; i < 24; ++i)
        specs.push_back({default_config(sc.space), "result:" + std::to_string(i) + ".5",
                         static_cast<uint64_t>(i)});

    auto results = run_batch(sc, specs, 4);
    REQUIRE(results.size() == specs.size());
    for (size_t i = 0; i < specs.size(); ++i) {
        CHECK(results[i].spec.instance == specs[i].instance);
        CHECK(results[i].spec.seed == specs[i].seed);
        CHECK(results[i].load_tag == 4);
        CHECK(results[i].outcome == Outcome::Success);
        CHECK(*results[i].reported == doctest::Approx(static_cast<double>(i) + 0.5));
    }

    // limit 1 gives sequential execution with identical classifications
    auto sequential = run_batch(sc, specs, 1);
    for (size_t i = 0; i < specs.size(); ++i) {
        CHECK(sequential[i].load_tag == 1);
        CHECK(sequential[i].outcome == results[i].outcome);
        CHECK(*sequential[i].reported == *results[i].reported);
    }
}

TEST_CASE("run_batch: harness errors propagate per element without aborting") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"i"});
    sc.command_template = FAKEBENCH_PATH " {instance} {seed}";
    std::vector<RunSpec> specs;
    specs.push_back({default_config(sc.space), "result:1.0", 0});
    specs.push_back({default_config(sc.space), "result:2.0", 1});
    sc.command_template = "/nonexistent/binary {instance} {seed}";
    auto broken = run_batch(sc, specs, 2);
    CHECK(broken[0].outcome == Outcome::HarnessError);
    CHECK(broken[1].outcome == Outcome::HarnessError);
}

TEST_CASE("re-running a deterministic stub yields the same outcome class") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]\nb {true, false} [false]",
                                    {"crash-if-ab"});
    Configuration both = validate_config(
        sc.space, {{"a", std::string("true")}, {"b", std::string("true")}});
    Configuration one = validate_config(
        sc.space, {{"a", std::string("true")}, {"b", std::string("false")}});
    for (int rep = 0; rep < 3; ++rep) {
        CHECK(execute_run(sc, {both, "crash-if-ab", 5}).outcome == Outcome::Crash);
        CHECK(execute_run(sc, {one, "crash-if-ab", 5}).outcome == Outcome::Success);
    }
}

TEST_CASE("run log round trip") {
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"i"});
    auto dir = testsupport::fresh_temp_dir("runlog");
    std::vector<RunSpec> specs{{default_config(sc.space), "result:1.25", 3},
                               {default_config(sc.space), "exit:2", 4}};
    auto results = run_batch(sc, specs, 1);
    append_run_log(dir / "runlog.ndjson", results);
    auto loaded = read_run_log(dir / "runlog.ndjson", sc.space);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].spec.config == results[0].spec.config);
    CHECK(loaded[0].outcome == Outcome::Success);
    CHECK(*loaded[0].reported == doctest::Approx(1.25));
    CHECK(loaded[1].outcome == Outcome::Crash);
    CHECK(loaded[1].spec.seed == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("environment scrub list removes matching variables") {
    setenv("PARTUNE_TEST_SCRUBBED", "1", 1);
    setenv("PARTUNE_TEST_KEPT", "1", 1);
    setenv("PARTUNE_PREFIXED_X", "1", 1);
    ScenarioSpec sc = stub_scenario("a {true, false} [true]", {"i"});
    sc.env_scrub = {"PARTUNE_TEST_SCRUBBED", "PARTUNE_PREFIXED_*"};

    auto probe = [&](const std::string& name) {
        RunResult r = execute_run(sc, {default_config(sc.space), "env:" + name, 0});
        REQUIRE(r.outcome == Outcome::Success);
        return *r.reported;
    };
    CHECK(probe("PARTUNE_TEST_SCRUBBED") == doctest::Approx(0));
    CHECK(probe("PARTUNE_PREFIXED_X") == doctest::Approx(0));
    CHECK(probe("PARTUNE_TEST_KEPT") == doctest::Approx(1));
    unsetenv("PARTUNE_TEST_SCRUBBED");
    unsetenv("PARTUNE_TEST_KEPT");
    unsetenv("PARTUNE_PREFIXED_X");
}
