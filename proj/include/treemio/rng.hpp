#pragma once

// PCG32 (XSH-RR variant): 64-bit LCG state, 32-bit output.
// state' = state * 6364136223846793005 + inc, inc odd. Seeding follows the
// reference pcg32_srandom_r sequence so streams are reproducible anywhere.

#include <cstdint>

namespace treemio {

class Pcg32 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kDefaultStream = 1442695040888963407ULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream >> 1) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream = kDefaultStream >> 1) {
    state_ = 0;
    inc_ = (stream << 1) | 1U;
    next();
    state_ += seed;
    next();
  }

  std::uint32_t next() {
    std::uint64_t old = state_;
    state_ = old * kMultiplier + inc_;
    auto xorshifted = static_cast<std::uint32_t>(((old >> 18U) ^ old) >> 27U);
    auto rot = static_cast<std::uint32_t>(old >> 59U);
    return (xorshifted >> rot) | (xorshifted << ((32U - rot) & 31U));
  }

  /// Uniform in [0, bound) without modulo bias.
  std::uint32_t below(std::uint32_t bound) {
    std::uint32_t threshold = (0U - bound) % bound;
    while (true) {
      std::uint32_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    std::uint64_t hi = next() >> 5U;  // 27 bits
    std::uint64_t lo = next() >> 6U;  // 26 bits
    return static_cast<double>((hi << 26U) | lo) * (1.0 / 9007199254740992.0);
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // UniformRandomBitGenerator interface.
  using result_type = std::uint32_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xffffffffU; }
  result_type operator()() { return next(); }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace treemio
