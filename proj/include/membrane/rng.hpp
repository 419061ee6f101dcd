#pragma once

#include <cmath>
#include <cstdint>

namespace membrane::rng {

/// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Keyed counter word: a pure function of (seed, replicate, draw).
constexpr std::uint64_t counter_word(std::uint64_t seed, std::uint64_t replicate,
                                     std::uint64_t draw) {
  return mix64(mix64(mix64(seed) ^ replicate) ^ draw);
}

/// Uniform on (0,1), never returning either endpoint.
inline double to_unit(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, std::uint64_t replicate, std::uint64_t draw) {
  return to_unit(counter_word(seed, replicate, draw));
}

/// Standard normal draw j of replicate r: Box-Muller on the counter pair
/// (2j, 2j+1). Stateless, so rows can be generated in any order.
inline double normal(std::uint64_t seed, std::uint64_t replicate, std::uint64_t draw) {
  const double u1 = uniform01(seed, replicate, 2 * draw);
  const double u2 = uniform01(seed, replicate, 2 * draw + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Sequential engine for walk simulation; state advances by the golden-ratio
/// increment and outputs pass through the finalizer.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  /// Uniform integer in [0, bound) via the fixed-point multiply reduction.
  std::uint32_t below(std::uint32_t bound) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  double uniform() { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace membrane::rng
