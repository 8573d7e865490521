#pragma once

#include <cstdint>
#include <random>

namespace qtsp::rng {

// All randomness in the library flows through std::mt19937_64 seeded from a
// single 64-bit value. The generator's output sequence is pinned by the C++
// standard, so identical seeds give identical streams on every platform.
//
// Sub-streams (per instance, per initialization, per iteration, per group)
// are derived from a root seed by chaining splitmix64 over the root and a
// sequence of context words. The derivation is part of the file-format
// contract: replaying a recorded seed reproduces the exact draws.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t word) {
    return splitmix64(seed ^ (word * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
}

template <typename... Words>
std::uint64_t derive(std::uint64_t root, Words... words) {
    std::uint64_t s = splitmix64(root);
    ((s = mix(s, static_cast<std::uint64_t>(words))), ...);
    return s;
}

// Maps a raw 64-bit draw to a double in [0, 1) using the top 53 bits.
// Used instead of std::uniform_real_distribution, whose output is not
// pinned by the standard.
inline double to_unit_double(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * to_unit_double(gen());
}

// Uniform integer in [lo, hi] via the unit-double mapping (documented,
// stream-stable; the tiny floor bias is irrelevant for fixture weights).
inline long uniform_int(std::mt19937_64& gen, long lo, long hi) {
    double u = to_unit_double(gen());
    long span = hi - lo + 1;
    long v = lo + static_cast<long>(u * static_cast<double>(span));
    return v > hi ? hi : v;
}

// Samples an index from an unnormalized non-negative weight vector.
inline std::size_t sample_index(std::mt19937_64& gen, const double* w, std::size_t count, double total) {
    double u = to_unit_double(gen()) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        acc += w[i];
        if (u < acc) return i;
    }
    return count - 1;
}

} // namespace qtsp::rng
