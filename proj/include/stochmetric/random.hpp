#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace stochmetric {

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of realization `index` under `master`:
///   splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15).
constexpr std::uint64_t substream_seed(std::uint64_t master,
                                       std::uint64_t index) noexcept {
  return splitmix64_mix(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// mt19937_64 with distribution code spelled out, so draws are identical
/// across standard library implementations (std:: distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box–Muller; one draw per call, cosine branch.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace stochmetric
