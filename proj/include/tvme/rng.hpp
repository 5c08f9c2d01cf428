#pragma once

#include <cstdint>
#include <random>

namespace tvme::rng {

// SplitMix64 finalizer, used to spread (seed, stream) pairs over seed space.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Generator for replication `stream` of a run seeded with `seed`. The
// derivation depends only on (seed, stream), so the draws a replication sees
// do not depend on how a parallel schedule interleaves replications.
inline std::mt19937_64 make_generator(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(~stream)));
}

}  // namespace tvme::rng
