#pragma once

#include <cstdint>
#include <random>

namespace partune {

// Deterministic uniform draws on top of mt19937_64. The standard distributions
// are implementation-defined, so the value mappings live here: identical seeds
// give identical draws on every platform this builds on.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive.
    int64_t next_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
        if (span == 0) return lo + static_cast<int64_t>(engine_());  // full 64-bit range
        uint64_t offset = static_cast<uint64_t>(next_double() * static_cast<double>(span));
        if (offset >= span) offset = span - 1;
        return lo + static_cast<int64_t>(offset);
    }

    // Uniform real in [lo, hi].
    double next_real(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    size_t next_index(size_t n) { return static_cast<size_t>(next_int(0, static_cast<int64_t>(n) - 1)); }

private:
    std::mt19937_64 engine_;
};

}  // namespace partune
