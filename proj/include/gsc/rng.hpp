#pragma once

// Deterministic, platform-independent randomness.
//
// Two pieces:
//   - mix(seed, index): the index-th output of a SplitMix64 generator seeded
//     with `seed`. Used to split one base seed into independent per-document
//     stream seeds without any shared state.
//   - Xoshiro256StarStar: the sampling generator, state seeded from SplitMix64
//     as its authors recommend.
//
// Integer draws use masked rejection and doubles take the top 53 bits, so a
// given seed produces identical streams on every platform. Nothing here goes
// through <random> distributions, whose output is implementation-defined.

#include <bit>
#include <cmath>
#include <cstdint>

namespace gsc {

inline constexpr std::uint64_t kSplitMix64Gamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// index-th output of SplitMix64 seeded with `seed`.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  return splitmix64_finalize(seed + kSplitMix64Gamma * (index + 1));
}

class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256StarStar(std::uint64_t seed)
      : state_{mix(seed, 0), mix(seed, 1), mix(seed, 2), mix(seed, 3)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  constexpr std::uint64_t next() {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
  }

  constexpr std::uint64_t operator()() { return next(); }

  // Unbiased uniform draw from [0, n). Rejection against the smallest
  // all-ones mask covering n-1; no modulo bias, no platform dependence.
  constexpr std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t mask = ~0ull >> std::countl_zero(n - 1);
    std::uint64_t v = next() & mask;
    while (v >= n) v = next() & mask;
    return v;
  }

  // Uniform double in [0, 1), 53 random bits.
  constexpr double unit_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. Consumes exactly two draws.
  double normal() {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace gsc
