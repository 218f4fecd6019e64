#include "partune/runner.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "partune/errors.hpp"

extern char** environ;

namespace partune {

namespace {

constexpr std::chrono::milliseconds kPollInterval{50};
constexpr auto kKillGrace = std::chrono::seconds(2);

double timeval_seconds(const timeval& tv) {
    return static_cast<double>(tv.tv_sec) + static_cast<double>(tv.tv_usec) * 1e-6;
}

// CPU seconds of the live process plus its reaped descendants, from
// /proc/<pid>/stat. Returns -1 once the process is gone.
double proc_cpu_seconds(pid_t pid) {
    char path[64];
    std::snprintf(path, sizeof path, "/proc/%d/stat", pid);
    std::ifstream in(path);
    if (!in) return -1;
    std::string content;
    std::getline(in, content);
    size_t close_paren = content.rfind(')');
    if (close_paren == std::string::npos) return -1;
    std::istringstream fields(content.substr(close_paren + 1));
    std::string tok;
    long long utime = 0, stime = 0, cutime = 0, cstime = 0;
    // after the comm field: state ppid pgrp session tty tpgid flags minflt
    // cminflt majflt cmajflt utime stime cutime cstime ...
    for (int i = 0; i < 15 && fields >> tok; ++i) {
        if (i == 11) utime = std::atoll(tok.c_str());
        if (i == 12) stime = std::atoll(tok.c_str());
        if (i == 13) cutime = std::atoll(tok.c_str());
        if (i == 14) cstime = std::atoll(tok.c_str());
    }
    static const double tick = static_cast<double>(sysconf(_SC_CLK_TCK));
    return static_cast<double>(utime + stime + cutime + cstime) / tick;
}

bool scrub_matches(const std::string& name, const std::string& pattern) {
    if (!pattern.empty() && pattern.back() == '*')
        return name.rfind(pattern.substr(0, pattern.size() - 1), 0) == 0;
    return name == pattern;
}

std::vector<std::string> scrubbed_environment(const std::vector<std::string>& scrub) {
    std::vector<std::string> env;
    for (char** e = environ; *e; ++e) {
        std::string entry(*e);
        std::string name = entry.substr(0, entry.find('='));
        bool drop = false;
        for (const std::string& pat : scrub) drop = drop || scrub_matches(name, pat);
        if (!drop) env.push_back(std::move(entry));
    }
    return env;
}

std::optional<double> parse_reported(const std::string& stdout_text) {
    std::optional<double> reported;
    size_t pos = 0;
    while (pos < stdout_text.size()) {
        size_t eol = stdout_text.find('\n', pos);
        std::string_view line(stdout_text.data() + pos,
                              (eol == std::string::npos ? stdout_text.size() : eol) - pos);
        pos = eol == std::string::npos ? stdout_text.size() : eol + 1;
        if (line.rfind("RESULT:", 0) != 0) continue;
        line.remove_prefix(7);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
        if (auto v = parse_real(line)) reported = *v;
    }
    return reported;
}

struct TempFile {
    int fd = -1;
    std::string path;

    TempFile() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "partune-out-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        fd = mkstemp(buf.data());
        if (fd >= 0) path.assign(buf.data());
    }
    ~TempFile() {
        if (fd >= 0) close(fd);
        if (!path.empty()) unlink(path.c_str());
    }
    std::string read_all() const {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
};

// SIGTERM to the group, 2 s grace, SIGKILL, then reap the direct child.
void terminate_group(pid_t pid, int* status, rusage* ru) {
    kill(-pid, SIGTERM);
    auto deadline = std::chrono::steady_clock::now() + kKillGrace;
    while (std::chrono::steady_clock::now() < deadline) {
        if (wait4(pid, status, WNOHANG, ru) == pid) {
            kill(-pid, SIGKILL);  // mop up stragglers in the group
            return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    kill(-pid, SIGKILL);
    wait4(pid, status, 0, ru);
    kill(-pid, SIGKILL);
}

}  // namespace

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Success: return "SUCCESS";
        case Outcome::Timeout: return "TIMEOUT";
        case Outcome::Crash: return "CRASH";
        case Outcome::HarnessError: return "HARNESS_ERROR";
    }
    return "HARNESS_ERROR";
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "SUCCESS") return Outcome::Success;
    if (s == "TIMEOUT") return Outcome::Timeout;
    if (s == "CRASH") return Outcome::Crash;
    if (s == "HARNESS_ERROR") return Outcome::HarnessError;
    throw std::invalid_argument("unknown outcome '" + s + "'");
}

std::vector<std::string> render_command(const ScenarioSpec& scenario, const RunSpec& spec) {
    std::vector<std::string> argv;
    std::istringstream tokens(scenario.command_template);
    std::string token;
    while (tokens >> token) {
        if (token == "{params}") {
            for (const auto& [name, value] : spec.config.values())
                argv.push_back("--" + name + "=" + render_value(value));
            continue;
        }
        std::string out;
        size_t pos = 0;
        while (pos < token.size()) {
            size_t open = token.find('{', pos);
            if (open == std::string::npos) {
                out += token.substr(pos);
                break;
            }
            out += token.substr(pos, open - pos);
            size_t close = token.find('}', open);
            if (close == std::string::npos) throw ScenarioError("unterminated placeholder in template");
            std::string ph = token.substr(open + 1, close - open - 1);
            if (ph == "instance") {
                out += spec.instance;
            } else if (ph == "seed") {
                out += std::to_string(spec.seed);
            } else if (ph.rfind("param:", 0) == 0) {
                std::string name = ph.substr(6);
                if (!scenario.space.find_parameter(name))
                    throw ScenarioError("{param:" + name + "} names an unknown parameter");
                const Value* v = spec.config.find(name);
                if (!v)
                    throw ScenarioError("{param:" + name +
                                        "} names a parameter inactive in this configuration");
                out += render_value(*v);
            } else {
                throw ScenarioError("unrecognized placeholder {" + ph + "}");
            }
            pos = close + 1;
        }
        argv.push_back(std::move(out));
    }
    if (argv.empty()) throw ScenarioError("command template expands to an empty command");
    return argv;
}

RunResult execute_run(const ScenarioSpec& scenario, const RunSpec& spec, int load_tag) {
    RunResult result;
    result.spec = spec;
    result.load_tag = load_tag;
    result.timestamp_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::system_clock::now().time_since_epoch())
                              .count();

    std::vector<std::string> argv;
    try {
        argv = render_command(scenario, spec);
    } catch (const std::exception& ex) {
        result.outcome = Outcome::HarnessError;
        result.error = ex.what();
        return result;
    }

    TempFile out_capture;
    if (out_capture.fd < 0) {
        result.outcome = Outcome::HarnessError;
        result.error = "cannot create stdout capture file";
        return result;
    }

    std::vector<char*> argp;
    argp.reserve(argv.size() + 1);
    for (auto& a : argv) argp.push_back(a.data());
    argp.push_back(nullptr);

    std::vector<std::string> env = scrubbed_environment(scenario.env_scrub);
    std::vector<char*> envp;
    envp.reserve(env.size() + 1);
    for (auto& e : env) envp.push_back(e.data());
    envp.push_back(nullptr);

    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, out_capture.fd, STDOUT_FILENO);
    posix_spawn_file_actions_addopen(&fa, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);  // child leads its own process group

    pid_t pid = -1;
    int rc = posix_spawnp(&pid, argp[0], &fa, &attr, argp.data(), envp.data());
    posix_spawn_file_actions_destroy(&fa);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) {
        result.outcome = Outcome::HarnessError;
        result.error = std::string("spawn failed: ") + std::strerror(rc) + " (" + argv[0] + ")";
        return result;
    }

    const double cutoff = scenario.cutoff_s;
    const double wall_limit = scenario.wall_guard * cutoff;
    const auto start = std::chrono::steady_clock::now();

    enum class KillReason { None, Cpu, Wall } killed = KillReason::None;
    double polled_cpu = 0;
    int status = 0;
    rusage ru{};
    // back off from 1 ms to the steady 50 ms metering interval so short runs
    // are reaped promptly
    auto poll_sleep = std::chrono::milliseconds(1);
    for (;;) {
        pid_t r = wait4(pid, &status, WNOHANG, &ru);
        if (r == pid) break;
        if (r < 0 && errno != EINTR) {
            wait4(pid, &status, 0, &ru);
            break;
        }
        double cpu = proc_cpu_seconds(pid);
        if (cpu >= 0) polled_cpu = std::max(polled_cpu, cpu);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (polled_cpu >= cutoff) {
            killed = KillReason::Cpu;
        } else if (wall >= wall_limit) {
            killed = KillReason::Wall;
        }
        if (killed != KillReason::None) {
            terminate_group(pid, &status, &ru);
            break;
        }
        std::this_thread::sleep_for(poll_sleep);
        poll_sleep = std::min(poll_sleep * 2, kPollInterval);
    }

    result.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    double cpu = std::max(timeval_seconds(ru.ru_utime) + timeval_seconds(ru.ru_stime), polled_cpu);

    if (WIFSIGNALED(status)) result.term_signal = WTERMSIG(status);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);

    std::string stdout_text = out_capture.read_all();
    result.reported = parse_reported(stdout_text);

    if (cpu >= cutoff || killed == KillReason::Cpu) {
        // a run finishing exactly at the cutoff counts as timed out
        result.outcome = Outcome::Timeout;
        result.measured_s = std::min(std::max(cpu, cutoff), wall_limit);
    } else if (killed == KillReason::Wall) {
        result.outcome = Outcome::Timeout;
        result.measured_s = cutoff;  // CPU meter missed it; close at the cutoff
    } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
        result.measured_s = cpu;
        if (scenario.objective == ObjectiveSource::ReportedMetric && !result.reported) {
            result.outcome = Outcome::Crash;  // malformed harness output
            result.error = "missing RESULT line on stdout";
        } else {
            result.outcome = Outcome::Success;
        }
    } else {
        result.outcome = Outcome::Crash;
        result.measured_s = cpu;
    }
    return result;
}

std::vector<RunResult> run_batch(const ScenarioSpec& scenario, const std::vector<RunSpec>& specs,
                                 int concurrency_limit) {
    if (concurrency_limit < 1) throw ScenarioError("concurrency limit must be >= 1");
    std::vector<RunResult> results(specs.size());
    std::atomic<size_t> next{0};
    size_t workers = std::min<size_t>(static_cast<size_t>(concurrency_limit), specs.size());
    if (workers <= 1) {
        for (size_t i = 0; i < specs.size(); ++i)
            results[i] = execute_run(scenario, specs[i], concurrency_limit);
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= specs.size()) return;
                results[i] = execute_run(scenario, specs[i], concurrency_limit);
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

std::vector<RunResult> run_batch(const ScenarioSpec& scenario, const std::vector<RunSpec>& specs) {
    return run_batch(scenario, specs, scenario.jobs);
}

void append_run_log(const std::filesystem::path& path, const std::vector<RunResult>& results) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw HarnessError("cannot open run log '" + path.string() + "'");
    for (const RunResult& r : results) {
        nlohmann::ordered_json j;
        j["ts_ms"] = r.timestamp_ms;
        j["instance"] = r.spec.instance;
        j["seed"] = r.spec.seed;
        j["config_id"] = r.spec.config.id();
        j["config"] = r.spec.config.canonical();
        j["outcome"] = to_string(r.outcome);
        j["measured_s"] = r.measured_s;
        j["wall_s"] = r.wall_s;
        if (r.reported)
            j["reported"] = *r.reported;
        else
            j["reported"] = nullptr;
        j["exit_code"] = r.exit_code;
        if (r.term_signal)
            j["signal"] = *r.term_signal;
        else
            j["signal"] = nullptr;
        j["load"] = r.load_tag;
        if (!r.error.empty()) j["error"] = r.error;
        out << j.dump() << '\n';
    }
}

std::vector<RunResult> read_run_log(const std::filesystem::path& path, const ParameterSpace& space) {
    std::ifstream in(path);
    if (!in) throw HarnessError("cannot open run log '" + path.string() + "'");
    std::vector<RunResult> results;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        RunResult r;
        r.timestamp_ms = j.value("ts_ms", int64_t{0});
        r.spec.instance = j.at("instance").get<std::string>();
        r.spec.seed = j.at("seed").get<uint64_t>();
        r.spec.config = parse_config(space, j.at("config").get<std::string>());
        r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
        r.measured_s = j.at("measured_s").get<double>();
        r.wall_s = j.value("wall_s", 0.0);
        if (j.contains("reported") && !j.at("reported").is_null())
            r.reported = j.at("reported").get<double>();
        r.exit_code = j.value("exit_code", -1);
        if (j.contains("signal") && !j.at("signal").is_null())
            r.term_signal = j.at("signal").get<int>();
        r.load_tag = j.value("load", 1);
        r.error = j.value("error", std::string{});
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace partune
