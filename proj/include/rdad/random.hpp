#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rdad {

/// Default engine used across the library and the CLI.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a task seed from a master seed and a tuple of task indices.
/// The result depends only on the arguments, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (const std::uint64_t step : path) {
        h = mix64(h ^ mix64(step + 0x632be59bd9b4e019ULL));
    }
    return h;
}

}  // namespace rdad
