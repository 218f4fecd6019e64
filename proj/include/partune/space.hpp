#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "partune/errors.hpp"
#include "partune/value.hpp"

namespace partune {

struct IntegerRange {
    int64_t lo = 0;
    int64_t hi = 0;
    bool operator==(const IntegerRange&) const = default;
};

struct RealRange {
    double lo = 0;
    double hi = 0;
    bool log_scale = false;
    bool operator==(const RealRange&) const = default;
};

struct Categorical {
    std::vector<std::string> values;  // declaration order defines the category index
    bool operator==(const Categorical&) const = default;
};

using Domain = std::variant<IntegerRange, RealRange, Categorical>;

struct Parameter {
    std::string name;
    Domain domain;
    Value default_value;

    bool contains(const Value& v) const;
    // Categorical over exactly {true, false}; the canonical Boolean form.
    bool is_boolean() const;
    bool operator==(const Parameter&) const = default;
};

// child is active only while parent holds one of the activating values.
struct Condition {
    std::string child;
    std::string parent;
    std::vector<Value> activating;
    bool operator==(const Condition&) const = default;
};

// No valid configuration may satisfy all assignments at once.
struct ForbiddenClause {
    std::vector<std::pair<std::string, Value>> assignments;  // name-sorted
    std::string render() const;
    bool operator==(const ForbiddenClause&) const = default;
};

using ValueMap = std::map<std::string, Value>;

// An assignment of values to exactly the active parameters of a space.
// Immutable once constructed; equality and hashing go through the canonical
// serialization (`name=value` pairs, name-sorted, space-separated).
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(ValueMap values);

    const ValueMap& values() const { return values_; }
    const Value* find(const std::string& name) const;
    bool has(const std::string& name) const { return values_.count(name) > 0; }
    size_t size() const { return values_.size(); }

    const std::string& canonical() const { return canonical_; }
    // 16-hex-digit content id; stable across runs and hosts.
    const std::string& id() const { return id_; }

    bool operator==(const Configuration& other) const { return canonical_ == other.canonical_; }
    bool operator<(const Configuration& other) const { return canonical_ < other.canonical_; }

private:
    ValueMap values_;
    std::string canonical_;
    std::string id_;
};

class ParameterSpace {
public:
    ParameterSpace() = default;
    ParameterSpace(std::vector<Parameter> params, std::vector<Condition> conditions,
                   std::vector<ForbiddenClause> forbidden);

    const std::vector<Parameter>& parameters() const { return params_; }
    const std::vector<Condition>& conditions() const { return conditions_; }
    const std::vector<ForbiddenClause>& forbidden() const { return forbidden_; }

    const Parameter& parameter(const std::string& name) const;
    const Parameter* find_parameter(const std::string& name) const;
    // Condition whose child is `name`, or nullptr for unconditional parameters.
    const Condition* condition_of(const std::string& name) const;
    size_t parameter_index(const std::string& name) const;

    // Declaration-order-stable topological order (parents before children).
    const std::vector<size_t>& topological_order() const { return topo_order_; }

    bool violates_forbidden(const ValueMap& values) const;
    // The clause hit, for diagnostics; nullptr if none.
    const ForbiddenClause* violated_clause(const ValueMap& values) const;

    bool operator==(const ParameterSpace& other) const {
        return params_ == other.params_ && conditions_ == other.conditions_ &&
               forbidden_ == other.forbidden_;
    }

private:
    void validate_and_index();

    std::vector<Parameter> params_;
    std::vector<Condition> conditions_;
    std::vector<ForbiddenClause> forbidden_;
    std::unordered_map<std::string, size_t> index_;
    std::unordered_map<std::string, size_t> condition_by_child_;
    std::vector<size_t> topo_order_;
};

// --- operations ------------------------------------------------------------

ParameterSpace parse_space(std::string_view text);
ParameterSpace parse_space_file(const std::string& path);
std::string render_space(const ParameterSpace& space);

Configuration default_config(const ParameterSpace& space);

// Fixpoint of the activation relation over a partial assignment. The partial
// mapping must cover every unconditional parameter.
std::set<std::string> active_parameters(const ParameterSpace& space, const ValueMap& partial);

// Uniform per-domain sampling (log-uniform for log-scaled reals) in
// topological order; forbidden configurations rejected and resampled, up to
// 10,000 attempts. Same seed, same configuration.
Configuration sample_random(const ParameterSpace& space, uint64_t seed);

// Checks that `candidate` is exactly the active set, in-domain, and clause-free.
Configuration validate_config(const ParameterSpace& space, const ValueMap& candidate);

// Parse a canonical serialization ("a=true x=7") back into a Configuration.
Configuration parse_config(const ParameterSpace& space, std::string_view canonical);

struct DiffEntry {
    std::string name;
    std::optional<Value> from;  // nullopt = inactive in a
    std::optional<Value> to;    // nullopt = inactive in b
    bool operator==(const DiffEntry&) const = default;
};

// Name-sorted symmetric difference plus changed values; empty iff a == b.
std::vector<DiffEntry> config_diff(const ParameterSpace& space, const Configuration& a,
                                   const Configuration& b);

// Re-assign one parameter and re-close the result under activation: children
// activated by the change take their value from `prefer` when it has them,
// otherwise their defaults; deactivated parameters are dropped. Returns
// nullopt when the result hits a forbidden clause.
std::optional<Configuration> flip_parameter(const ParameterSpace& space, const Configuration& base,
                                            const std::string& name, const Value& value,
                                            const Configuration* prefer = nullptr);

}  // namespace partune
