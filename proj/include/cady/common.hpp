#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace cady {

using Rng = std::mt19937_64;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - std::numbers::pi;
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Derives an independent stream seed from (master, index) with splitmix64.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace cady
