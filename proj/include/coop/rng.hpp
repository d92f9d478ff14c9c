#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coop {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream for replica `index` of a run seeded with `master`.
Rng make_stream(std::uint64_t master, std::uint64_t index);

// Child seed, for nesting streams (grid point -> replica).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) {
  return -std::log1p(-uniform01(rng)) / rate;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

}  // namespace coop
