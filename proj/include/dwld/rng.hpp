#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "dwld/types.hpp"

namespace dwld {

using Rng = std::mt19937_64;

/// SplitMix64 step. Used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable hash of (master, stream, index) into a fresh seed. Trials seeded
/// this way are reproducible and independent of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master;
  s ^= splitmix64(s) + 0x9e3779b97f4a7c15ULL * (stream + 1);
  s ^= splitmix64(s) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  return splitmix64(s);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// One draw from CN(0, variance): real and imaginary parts are independent
/// N(0, variance/2).
inline Complex complex_normal(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> dist(0.0, std::sqrt(0.5 * variance));
  const double re = dist(rng);
  const double im = dist(rng);
  return {re, im};
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace dwld
