#pragma once

#include <cmath>
#include <cstdint>

namespace panelseg::rng {

// Counter-based generator built on SplitMix64 mixing. Every draw is a pure
// function of (seed, purpose, stream, counter), so substreams can be
// evaluated in any order, or in parallel, with identical output. Panels get
// one stream each; growing d never reshuffles earlier panels.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

enum class Purpose : std::uint64_t {
  Innovations = 1,
  CommonFactors = 2,
  LocationOffsets = 3,
  Generic = 4,
};

class Substream {
 public:
  Substream(std::uint64_t seed, Purpose purpose, std::uint64_t stream)
      : base_(mix64(mix64(seed + kGolden) ^
                    (static_cast<std::uint64_t>(purpose) * 0xA24BAED4963EE407ull)) +
              mix64(stream * 0x9FB21C651E98DF25ull + 1ull)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix64(mix64(base_ + counter * kGolden));
  }

  // Uniform on [0, 1).
  double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch); consumes counters 2c, 2c+1.
  double normal(std::uint64_t c) const {
    const double u1 = (static_cast<double>(bits(2 * c) >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = uniform01(2 * c + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383280 * u2);
  }

  // Uniform on [-a, a).
  double uniform_sym(std::uint64_t counter, double a) const {
    return a * (2.0 * uniform01(counter) - 1.0);
  }

 private:
  std::uint64_t base_;
};

// Independent 64-bit seed per (grid point, repetition) and similar pairs.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(master ^ mix64(a + kGolden)) + b * kGolden);
}

}  // namespace panelseg::rng
