#pragma once

#include <cstdint>

namespace transrank {

/// SplitMix64 generator. The output stream is fully specified, so every
/// seeded draw in the library is reproducible across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, range) by rejection; range must be > 0.
  std::uint64_t below(std::uint64_t range) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t r = next();
    while (r >= limit) r = next();
    return r % range;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace transrank
