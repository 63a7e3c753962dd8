#pragma once

#include <cstdint>
#include <random>

namespace maskbench {

// Deterministic random helpers. std::mt19937_64 output is specified bit-exactly,
// but the standard distributions are not; these mappings are, so equal seeds
// produce identical streams on every platform.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Combines a seed with stream identifiers (image index, instance ordinal)
// so substreams stay decoupled no matter how many draws each one makes.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
}

// Integer in [lo, hi], inclusive. Modulo mapping: the tiny bias is irrelevant
// here and the result is platform-independent, which is what matters.
inline std::int64_t rand_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(rng() % span);
}

// Uniform double in [0, 1) with 53 random bits.
inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace maskbench
