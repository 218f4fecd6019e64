#include "partune/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "partune/rng.hpp"

namespace partune {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' ||
           c == '+' || c == ':';
}

// Cursor over one already comment-stripped line.
struct LineScanner {
    std::string_view text;
    size_t pos = 0;
    int line = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    int col() const { return static_cast<int>(pos) + 1; }

    [[noreturn]] void fail(const std::string& msg) { throw SpaceParseError(line, col(), msg); }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            fail(std::string("expected '") + c + "'");
        ++pos;
    }
    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::string token() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() && is_name_char(text[pos])) ++pos;
        if (pos == start) fail("expected a token");
        return std::string(text.substr(start, pos - start));
    }
    bool accept_word(std::string_view w) {
        skip_ws();
        if (text.substr(pos, w.size()) == w &&
            (pos + w.size() >= text.size() || !is_name_char(text[pos + w.size()]))) {
            pos += w.size();
            return true;
        }
        return false;
    }
};

Value parse_value_in_domain(const Parameter& p, const std::string& token, LineScanner& sc) {
    if (std::holds_alternative<IntegerRange>(p.domain)) {
        auto v = parse_int(token);
        if (!v) sc.fail("expected integer value for parameter '" + p.name + "'");
        return *v;
    }
    if (std::holds_alternative<RealRange>(p.domain)) {
        auto v = parse_real(token);
        if (!v) sc.fail("expected real value for parameter '" + p.name + "'");
        return *v;
    }
    return token;
}

std::string canonical_serialization(const ValueMap& values) {
    std::string out;
    for (const auto& [name, value] : values) {
        if (!out.empty()) out += ' ';
        out += name;
        out += '=';
        out += render_value(value);
    }
    return out;
}

bool value_matches(const Value& a, const Value& b) { return a == b; }

}  // namespace

// --- Parameter ---------------------------------------------------------------

bool Parameter::contains(const Value& v) const {
    if (const auto* r = std::get_if<IntegerRange>(&domain)) {
        const auto* iv = std::get_if<int64_t>(&v);
        return iv && *iv >= r->lo && *iv <= r->hi;
    }
    if (const auto* r = std::get_if<RealRange>(&domain)) {
        const auto* dv = std::get_if<double>(&v);
        return dv && *dv >= r->lo && *dv <= r->hi;
    }
    const auto& cat = std::get<Categorical>(domain);
    const auto* sv = std::get_if<std::string>(&v);
    return sv && std::find(cat.values.begin(), cat.values.end(), *sv) != cat.values.end();
}

bool Parameter::is_boolean() const {
    const auto* cat = std::get_if<Categorical>(&domain);
    return cat && cat->values.size() == 2 && cat->values[0] == "true" && cat->values[1] == "false";
}

std::string ForbiddenClause::render() const {
    std::string out = "{";
    for (size_t i = 0; i < assignments.size(); ++i) {
        if (i) out += ", ";
        out += assignments[i].first;
        out += '=';
        out += render_value(assignments[i].second);
    }
    out += '}';
    return out;
}

// --- Configuration -----------------------------------------------------------

Configuration::Configuration(ValueMap values)
    : values_(std::move(values)),
      canonical_(canonical_serialization(values_)),
      id_(hex64(fnv1a64(canonical_))) {}

const Value* Configuration::find(const std::string& name) const {
    auto it = values_.find(name);
    return it == values_.end() ? nullptr : &it->second;
}

// --- ParameterSpace ----------------------------------------------------------

ParameterSpace::ParameterSpace(std::vector<Parameter> params, std::vector<Condition> conditions,
                               std::vector<ForbiddenClause> forbidden)
    : params_(std::move(params)), conditions_(std::move(conditions)), forbidden_(std::move(forbidden)) {
    validate_and_index();
}

void ParameterSpace::validate_and_index() {
    index_.clear();
    for (size_t i = 0; i < params_.size(); ++i) {
        auto [it, inserted] = index_.emplace(params_[i].name, i);
        if (!inserted) throw SpaceParseError(0, 0, "duplicate parameter name '" + params_[i].name + "'");
        if (const auto* r = std::get_if<IntegerRange>(&params_[i].domain)) {
            if (r->lo > r->hi)
                throw SpaceParseError(0, 0, "parameter '" + params_[i].name + "': lo > hi");
        } else if (const auto* rr = std::get_if<RealRange>(&params_[i].domain)) {
            if (rr->lo > rr->hi)
                throw SpaceParseError(0, 0, "parameter '" + params_[i].name + "': lo > hi");
            if (rr->log_scale && rr->lo <= 0)
                throw SpaceParseError(0, 0,
                                      "parameter '" + params_[i].name + "': log scale requires lo > 0");
        } else if (std::get<Categorical>(params_[i].domain).values.empty()) {
            throw SpaceParseError(0, 0, "parameter '" + params_[i].name + "': empty categorical domain");
        }
        if (!params_[i].contains(params_[i].default_value))
            throw SpaceParseError(0, 0, "parameter '" + params_[i].name + "': default outside domain");
    }

    condition_by_child_.clear();
    for (size_t i = 0; i < conditions_.size(); ++i) {
        const Condition& c = conditions_[i];
        if (!index_.count(c.child))
            throw SpaceParseError(0, 0, "condition references unknown parameter '" + c.child + "'");
        if (!index_.count(c.parent))
            throw SpaceParseError(0, 0, "condition references unknown parameter '" + c.parent + "'");
        if (c.child == c.parent)
            throw SpaceParseError(0, 0, "condition child equals parent '" + c.child + "'");
        if (c.activating.empty())
            throw SpaceParseError(0, 0, "condition on '" + c.child + "' has no activating values");
        const Parameter& parent = params_[index_.at(c.parent)];
        for (const Value& v : c.activating)
            if (!parent.contains(v))
                throw SpaceParseError(0, 0, "activating value " + render_value(v) +
                                                " outside domain of '" + c.parent + "'");
        if (!condition_by_child_.emplace(c.child, i).second)
            throw SpaceParseError(0, 0, "parameter '" + c.child + "' has more than one condition");
    }

    for (const ForbiddenClause& cl : forbidden_) {
        if (cl.assignments.empty()) throw SpaceParseError(0, 0, "empty forbidden clause");
        for (const auto& [name, value] : cl.assignments) {
            auto it = index_.find(name);
            if (it == index_.end())
                throw SpaceParseError(0, 0, "forbidden clause references unknown parameter '" + name + "'");
            if (!params_[it->second].contains(value))
                throw SpaceParseError(0, 0, "forbidden value " + render_value(value) +
                                                " outside domain of '" + name + "'");
        }
    }

    // Kahn's algorithm over parent->child edges; ties broken by declaration
    // order so sampling order is reproducible. Leftover nodes mean a cycle.
    std::vector<int> pending(params_.size(), 0);
    for (const Condition& c : conditions_) pending[index_.at(c.child)] += 1;
    topo_order_.clear();
    std::vector<bool> emitted(params_.size(), false);
    for (size_t round = 0; round < params_.size(); ++round) {
        size_t pick = params_.size();
        for (size_t i = 0; i < params_.size(); ++i) {
            if (!emitted[i] && pending[i] == 0) {
                pick = i;
                break;
            }
        }
        if (pick == params_.size()) throw SpaceParseError(0, 0, "cyclic parameter conditions");
        emitted[pick] = true;
        topo_order_.push_back(pick);
        for (const Condition& c : conditions_)
            if (c.parent == params_[pick].name) pending[index_.at(c.child)] -= 1;
    }

    // The all-defaults configuration must not hit a forbidden clause.
    ValueMap defaults;
    for (size_t idx : topo_order_) {
        const Parameter& p = params_[idx];
        auto cit = condition_by_child_.find(p.name);
        if (cit != condition_by_child_.end()) {
            const Condition& c = conditions_[cit->second];
            auto pit = defaults.find(c.parent);
            if (pit == defaults.end()) continue;
            bool activated = false;
            for (const Value& v : c.activating) activated = activated || value_matches(v, pit->second);
            if (!activated) continue;
        }
        defaults.emplace(p.name, p.default_value);
    }
    if (const ForbiddenClause* cl = violated_clause(defaults))
        throw SpaceParseError(0, 0, "default configuration violates forbidden clause " + cl->render());
}

const Parameter& ParameterSpace::parameter(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError(ConfigError::Kind::ExtraParameter, "unknown parameter '" + name + "'");
    return params_[it->second];
}

const Parameter* ParameterSpace::find_parameter(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
}

size_t ParameterSpace::parameter_index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError(ConfigError::Kind::ExtraParameter, "unknown parameter '" + name + "'");
    return it->second;
}

const Condition* ParameterSpace::condition_of(const std::string& name) const {
    auto it = condition_by_child_.find(name);
    return it == condition_by_child_.end() ? nullptr : &conditions_[it->second];
}

const ForbiddenClause* ParameterSpace::violated_clause(const ValueMap& values) const {
    for (const ForbiddenClause& cl : forbidden_) {
        bool all = true;
        for (const auto& [name, value] : cl.assignments) {
            auto it = values.find(name);
            if (it == values.end() || !value_matches(it->second, value)) {
                all = false;
                break;
            }
        }
        if (all) return &cl;
    }
    return nullptr;
}

bool ParameterSpace::violates_forbidden(const ValueMap& values) const {
    return violated_clause(values) != nullptr;
}

// --- parsing -----------------------------------------------------------------

namespace {

struct RawCondition {
    Condition cond;
    std::vector<std::string> value_tokens;
    int line;
    int col;
};

struct RawClause {
    std::vector<std::pair<std::string, std::string>> assignments;  // name, value token
    int line;
    int col;
};

}  // namespace

ParameterSpace parse_space(std::string_view text) {
    std::vector<Parameter> params;
    std::vector<RawCondition> raw_conditions;
    std::vector<RawClause> raw_clauses;

    int line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t eol = text.find('\n', start);
        std::string_view line = text.substr(start, eol == std::string_view::npos ? std::string_view::npos
                                                                                 : eol - start);
        start = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        LineScanner sc{line, 0, line_no};
        if (sc.at_end()) continue;

        if (sc.peek() == '{') {
            // forbidden clause: {NAME1=V1, NAME2=V2, ...}
            RawClause cl;
            cl.line = line_no;
            cl.col = sc.col();
            sc.expect('{');
            do {
                std::string name = sc.token();
                sc.expect('=');
                std::string value = sc.token();
                cl.assignments.emplace_back(std::move(name), std::move(value));
            } while (sc.accept(','));
            sc.expect('}');
            if (!sc.at_end()) sc.fail("trailing text after forbidden clause");
            raw_clauses.push_back(std::move(cl));
            continue;
        }

        std::string name = sc.token();
        if (sc.accept('|')) {
            // condition: CHILD | PARENT in {V1, V2, ...}
            RawCondition rc;
            rc.line = line_no;
            rc.cond.child = name;
            rc.cond.parent = sc.token();
            rc.col = sc.col();
            if (!sc.accept_word("in")) sc.fail("expected 'in'");
            sc.expect('{');
            do {
                rc.value_tokens.push_back(sc.token());
            } while (sc.accept(','));
            sc.expect('}');
            if (!sc.at_end()) sc.fail("trailing text after condition");
            raw_conditions.push_back(std::move(rc));
            continue;
        }

        Parameter p;
        p.name = std::move(name);
        if (sc.accept_word("integer")) {
            sc.expect('[');
            std::string lo_tok = sc.token();
            sc.expect(',');
            std::string hi_tok = sc.token();
            sc.expect(']');
            auto lo = parse_int(lo_tok), hi = parse_int(hi_tok);
            if (!lo || !hi) sc.fail("integer bounds must be integer literals");
            sc.expect('[');
            auto def = parse_int(sc.token());
            if (!def) sc.fail("integer default must be an integer literal");
            sc.expect(']');
            if (*lo > *hi) sc.fail("lo > hi");
            p.domain = IntegerRange{*lo, *hi};
            p.default_value = *def;
        } else if (sc.accept_word("real")) {
            sc.expect('[');
            auto lo = parse_real(sc.token());
            sc.expect(',');
            auto hi = parse_real(sc.token());
            sc.expect(']');
            if (!lo || !hi) sc.fail("real bounds must be decimal literals");
            sc.expect('[');
            auto def = parse_real(sc.token());
            if (!def) sc.fail("real default must be a decimal literal");
            sc.expect(']');
            bool log_scale = sc.accept_word("log");
            if (*lo > *hi) sc.fail("lo > hi");
            if (log_scale && *lo <= 0) sc.fail("log scale requires lo > 0");
            p.domain = RealRange{*lo, *hi, log_scale};
            p.default_value = *def;
        } else if (sc.peek() == '{') {
            sc.expect('{');
            Categorical cat;
            do {
                cat.values.push_back(sc.token());
            } while (sc.accept(','));
            sc.expect('}');
            // canonical Boolean form
            if (cat.values.size() == 2 &&
                ((cat.values[0] == "true" && cat.values[1] == "false") ||
                 (cat.values[0] == "false" && cat.values[1] == "true")))
                cat.values = {"true", "false"};
            for (size_t i = 0; i < cat.values.size(); ++i)
                for (size_t j = i + 1; j < cat.values.size(); ++j)
                    if (cat.values[i] == cat.values[j]) sc.fail("duplicate categorical value");
            sc.expect('[');
            std::string def = sc.token();
            sc.expect(']');
            p.domain = std::move(cat);
            p.default_value = def;
        } else {
            sc.fail("expected 'integer', 'real', or a categorical domain");
        }
        if (!sc.at_end()) sc.fail("trailing text after parameter declaration");
        if (!p.contains(p.default_value)) sc.fail("default outside domain");
        params.push_back(std::move(p));
    }

    // Resolve condition and clause value tokens now that domains are known.
    auto find_param = [&](const std::string& n) -> const Parameter* {
        for (const Parameter& p : params)
            if (p.name == n) return &p;
        return nullptr;
    };

    std::vector<Condition> conditions;
    for (RawCondition& rc : raw_conditions) {
        const Parameter* parent = find_param(rc.cond.parent);
        LineScanner sc{"", 0, rc.line};
        sc.pos = static_cast<size_t>(rc.col - 1);
        if (!find_param(rc.cond.child))
            sc.fail("condition references unknown parameter '" + rc.cond.child + "'");
        if (!parent) sc.fail("condition references unknown parameter '" + rc.cond.parent + "'");
        for (const std::string& tok : rc.value_tokens)
            rc.cond.activating.push_back(parse_value_in_domain(*parent, tok, sc));
        conditions.push_back(std::move(rc.cond));
    }

    std::vector<ForbiddenClause> forbidden;
    for (RawClause& rc : raw_clauses) {
        ForbiddenClause cl;
        LineScanner sc{"", 0, rc.line};
        sc.pos = static_cast<size_t>(rc.col - 1);
        for (auto& [name, tok] : rc.assignments) {
            const Parameter* p = find_param(name);
            if (!p) sc.fail("forbidden clause references unknown parameter '" + name + "'");
            cl.assignments.emplace_back(name, parse_value_in_domain(*p, tok, sc));
        }
        std::sort(cl.assignments.begin(), cl.assignments.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        forbidden.push_back(std::move(cl));
    }

    return ParameterSpace(std::move(params), std::move(conditions), std::move(forbidden));
}

ParameterSpace parse_space_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open space file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_space(ss.str());
}

std::string render_space(const ParameterSpace& space) {
    std::ostringstream out;
    for (const Parameter& p : space.parameters()) {
        out << p.name << ' ';
        if (const auto* r = std::get_if<IntegerRange>(&p.domain)) {
            out << "integer [" << r->lo << ", " << r->hi << "] [" << render_value(p.default_value)
                << "]";
        } else if (const auto* rr = std::get_if<RealRange>(&p.domain)) {
            out << "real [" << render_value(Value{rr->lo}) << ", " << render_value(Value{rr->hi})
                << "] [" << render_value(p.default_value) << "]";
            if (rr->log_scale) out << " log";
        } else {
            const auto& cat = std::get<Categorical>(p.domain);
            out << '{';
            for (size_t i = 0; i < cat.values.size(); ++i) {
                if (i) out << ", ";
                out << cat.values[i];
            }
            out << "} [" << render_value(p.default_value) << "]";
        }
        out << '\n';
    }
    for (const Condition& c : space.conditions()) {
        out << c.child << " | " << c.parent << " in {";
        for (size_t i = 0; i < c.activating.size(); ++i) {
            if (i) out << ", ";
            out << render_value(c.activating[i]);
        }
        out << "}\n";
    }
    for (const ForbiddenClause& cl : space.forbidden()) out << cl.render() << '\n';
    return out.str();
}

// --- configuration operations --------------------------------------------------

namespace {

bool condition_holds(const Condition& c, const ValueMap& values) {
    auto it = values.find(c.parent);
    if (it == values.end()) return false;
    for (const Value& v : c.activating)
        if (value_matches(v, it->second)) return true;
    return false;
}

}  // namespace

Configuration default_config(const ParameterSpace& space) {
    ValueMap values;
    for (size_t idx : space.topological_order()) {
        const Parameter& p = space.parameters()[idx];
        const Condition* c = space.condition_of(p.name);
        if (c && !condition_holds(*c, values)) continue;
        values.emplace(p.name, p.default_value);
    }
    // Unreachable for spaces built through parse/constructor, which reject
    // defaults that hit a forbidden clause.
    if (const ForbiddenClause* cl = space.violated_clause(values))
        throw ConfigError(ConfigError::Kind::ForbiddenClauseHit,
                          "default configuration violates " + cl->render());
    return Configuration(std::move(values));
}

std::set<std::string> active_parameters(const ParameterSpace& space, const ValueMap& partial) {
    for (const Parameter& p : space.parameters())
        if (!space.condition_of(p.name) && !partial.count(p.name))
            throw ConfigError(ConfigError::Kind::MissingParameter,
                              "partial assignment missing unconditional parameter '" + p.name + "'");
    std::set<std::string> active;
    ValueMap known;
    for (size_t idx : space.topological_order()) {
        const Parameter& p = space.parameters()[idx];
        const Condition* c = space.condition_of(p.name);
        if (c && !condition_holds(*c, known)) continue;
        active.insert(p.name);
        auto it = partial.find(p.name);
        if (it != partial.end()) known.emplace(p.name, it->second);
    }
    return active;
}

Configuration sample_random(const ParameterSpace& space, uint64_t seed) {
    constexpr int kMaxAttempts = 10'000;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<uint64_t>(attempt)));
        ValueMap values;
        for (size_t idx : space.topological_order()) {
            const Parameter& p = space.parameters()[idx];
            const Condition* c = space.condition_of(p.name);
            if (c && !condition_holds(*c, values)) continue;
            if (const auto* r = std::get_if<IntegerRange>(&p.domain)) {
                values.emplace(p.name, rng.next_int(r->lo, r->hi));
            } else if (const auto* rr = std::get_if<RealRange>(&p.domain)) {
                if (rr->log_scale) {
                    double e = rng.next_real(std::log10(rr->lo), std::log10(rr->hi));
                    values.emplace(p.name, std::pow(10.0, e));
                } else {
                    values.emplace(p.name, rng.next_real(rr->lo, rr->hi));
                }
            } else {
                const auto& cat = std::get<Categorical>(p.domain);
                values.emplace(p.name, cat.values[rng.next_index(cat.values.size())]);
            }
        }
        if (!space.violates_forbidden(values)) return Configuration(std::move(values));
    }
    throw OverconstrainedSpaceError(
        "rejection sampling exhausted 10000 attempts; space is over-constrained");
}

Configuration validate_config(const ParameterSpace& space, const ValueMap& candidate) {
    for (const auto& [name, value] : candidate)
        if (!space.find_parameter(name))
            throw ConfigError(ConfigError::Kind::ExtraParameter, "unknown parameter '" + name + "'");

    std::set<std::string> active = active_parameters(space, candidate);
    for (const std::string& name : active)
        if (!candidate.count(name))
            throw ConfigError(ConfigError::Kind::MissingParameter,
                              "active parameter '" + name + "' missing from configuration");
    for (const auto& [name, value] : candidate) {
        if (!active.count(name))
            throw ConfigError(ConfigError::Kind::ExtraParameter,
                              "parameter '" + name + "' is inactive under this assignment");
        if (!space.parameter(name).contains(value))
            throw ConfigError(ConfigError::Kind::OutOfDomain,
                              "value " + render_value(value) + " outside domain of '" + name + "'");
    }
    if (const ForbiddenClause* cl = space.violated_clause(candidate))
        throw ConfigError(ConfigError::Kind::ForbiddenClauseHit,
                          "configuration violates forbidden clause " + cl->render());
    return Configuration(candidate);
}

Configuration parse_config(const ParameterSpace& space, std::string_view canonical) {
    ValueMap values;
    size_t pos = 0;
    while (pos < canonical.size()) {
        while (pos < canonical.size() && canonical[pos] == ' ') ++pos;
        if (pos >= canonical.size()) break;
        size_t eq = canonical.find('=', pos);
        if (eq == std::string_view::npos)
            throw ConfigError(ConfigError::Kind::ExtraParameter,
                              "malformed configuration text near '" + std::string(canonical.substr(pos)) + "'");
        size_t end = canonical.find(' ', eq);
        if (end == std::string_view::npos) end = canonical.size();
        std::string name(canonical.substr(pos, eq - pos));
        std::string token(canonical.substr(eq + 1, end - eq - 1));
        const Parameter* p = space.find_parameter(name);
        if (!p) throw ConfigError(ConfigError::Kind::ExtraParameter, "unknown parameter '" + name + "'");
        Value v;
        if (std::holds_alternative<IntegerRange>(p->domain)) {
            auto iv = parse_int(token);
            if (!iv)
                throw ConfigError(ConfigError::Kind::OutOfDomain,
                                  "expected integer for '" + name + "', got '" + token + "'");
            v = *iv;
        } else if (std::holds_alternative<RealRange>(p->domain)) {
            auto dv = parse_real(token);
            if (!dv)
                throw ConfigError(ConfigError::Kind::OutOfDomain,
                                  "expected real for '" + name + "', got '" + token + "'");
            v = *dv;
        } else {
            v = token;
        }
        values.emplace(std::move(name), std::move(v));
        pos = end;
    }
    return validate_config(space, values);
}

std::vector<DiffEntry> config_diff(const ParameterSpace& space, const Configuration& a,
                                   const Configuration& b) {
    for (const auto& [name, value] : a.values())
        if (!space.find_parameter(name))
            throw ConfigError(ConfigError::Kind::SpaceMismatch,
                              "configuration names parameter '" + name + "' unknown to this space");
    for (const auto& [name, value] : b.values())
        if (!space.find_parameter(name))
            throw ConfigError(ConfigError::Kind::SpaceMismatch,
                              "configuration names parameter '" + name + "' unknown to this space");

    std::vector<DiffEntry> diff;
    auto ia = a.values().begin();
    auto ib = b.values().begin();
    while (ia != a.values().end() || ib != b.values().end()) {
        if (ib == b.values().end() || (ia != a.values().end() && ia->first < ib->first)) {
            diff.push_back({ia->first, ia->second, std::nullopt});
            ++ia;
        } else if (ia == a.values().end() || ib->first < ia->first) {
            diff.push_back({ib->first, std::nullopt, ib->second});
            ++ib;
        } else {
            if (!value_matches(ia->second, ib->second))
                diff.push_back({ia->first, ia->second, ib->second});
            ++ia;
            ++ib;
        }
    }
    return diff;
}

std::optional<Configuration> flip_parameter(const ParameterSpace& space, const Configuration& base,
                                            const std::string& name, const Value& value,
                                            const Configuration* prefer) {
    ValueMap values = base.values();
    values[name] = value;

    // Re-close under activation from scratch: pick up activations and
    // deactivations caused by the flip in one pass over the topo order.
    ValueMap closed;
    for (size_t idx : space.topological_order()) {
        const Parameter& p = space.parameters()[idx];
        const Condition* c = space.condition_of(p.name);
        if (c && !condition_holds(*c, closed)) continue;
        auto it = values.find(p.name);
        if (it != values.end()) {
            closed.emplace(p.name, it->second);
        } else if (prefer != nullptr && prefer->find(p.name) != nullptr) {
            closed.emplace(p.name, *prefer->find(p.name));
        } else {
            closed.emplace(p.name, p.default_value);
        }
    }
    if (space.violates_forbidden(closed)) return std::nullopt;
    return Configuration(std::move(closed));
}

}  // namespace partune
