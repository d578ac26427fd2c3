#pragma once

#include <cstdint>
#include <utility>

namespace lockstep::det {

/// SplitMix64. Integer-only, so the stream for a seed is the same everywhere.
class DetRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit DetRng(std::uint64_t seed = 0) : state_(seed) {}

  constexpr std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Top 53 bits scaled into [0, 1).
  constexpr double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound); bound must be non-zero. Rejection sampling, no modulo bias.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t v = next();
      if (v >= limit) return v % bound;
    }
  }

  /// Uniform in [lo, hi).
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  constexpr std::uint64_t state() const { return state_; }

  // UniformRandomBitGenerator, for std::shuffle and friends in tests.
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }
  constexpr std::uint64_t operator()() { return next(); }

  friend constexpr bool operator==(const DetRng&, const DetRng&) = default;

 private:
  std::uint64_t state_;
};

constexpr DetRng rng_new(std::uint64_t seed) { return DetRng(seed); }

constexpr std::pair<std::uint64_t, DetRng> rng_next(DetRng rng) {
  const std::uint64_t v = rng.next();
  return {v, rng};
}

constexpr std::pair<double, DetRng> rng_unit(DetRng rng) {
  const double v = rng.unit();
  return {v, rng};
}

}  // namespace lockstep::det
