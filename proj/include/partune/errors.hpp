#pragma once

#include <stdexcept>
#include <string>

namespace partune {

// Malformed space DSL text. Carries 1-based line/column of the offending token.
class SpaceParseError : public std::runtime_error {
public:
    SpaceParseError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(column) +
                             ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// A candidate value mapping failed configuration validation. Each rejection
// class is distinct so harness bugs surface with their cause.
class ConfigError : public std::runtime_error {
public:
    enum class Kind {
        MissingParameter,   // active parameter absent from the mapping
        ExtraParameter,     // inactive or unknown parameter present
        OutOfDomain,        // value not a member of the parameter's domain
        ForbiddenClauseHit, // mapping satisfies a forbidden clause
        SpaceMismatch,      // configuration built against a different space
    };

    ConfigError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Rejection sampling exhausted its attempt budget: the space is over-constrained.
class OverconstrainedSpaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The harness itself failed (spawn failure, missing binary, broken scenario).
// Never conflated with a CRASH of the target.
class HarnessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad scenario file or command template.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace partune
