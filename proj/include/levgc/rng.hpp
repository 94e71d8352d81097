#pragma once

#include <cstdint>
#include <random>

namespace levgc {

// Deterministic seed derivation: one master seed fans out into independent
// per-trial streams addressed by index. splitmix64 is the usual finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace levgc
