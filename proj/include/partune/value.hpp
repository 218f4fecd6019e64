#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace partune {

// A parameter value: integer, real, or categorical token (booleans are the
// categorical tokens "true"/"false").
using Value = std::variant<int64_t, double, std::string>;

// Shortest round-trip decimal form. Integers print without exponent or dot.
std::string render_value(const Value& v);

std::optional<int64_t> parse_int(std::string_view text);
std::optional<double> parse_real(std::string_view text);

// FNV-1a 64-bit, used for configuration ids.
uint64_t fnv1a64(std::string_view data);
std::string hex64(uint64_t v);

// splitmix64 step; the seed-derivation primitive used everywhere a master
// seed has to fan out into independent deterministic streams.
uint64_t splitmix64(uint64_t& state);
uint64_t derive_seed(uint64_t base, uint64_t stream);

}  // namespace partune
