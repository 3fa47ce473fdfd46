#pragma once

#include <cstdint>
#include <random>

namespace markovht {

// splitmix64 finalizer; good avalanche, cheap.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent substream seed from a master seed and up to two tags.
/// All randomness in the library flows through one user seed plus fixed splits,
/// so parallel callers and repeat runs agree exactly.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(seed) ^ mix64(a)) ^ mix64(b));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace markovht
