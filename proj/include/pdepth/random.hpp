#pragma once

#include <cstdint>

namespace pdepth {

/// SplitMix64 generator. Output k of a stream with initial state s is
/// mix64(s + (k + 1) * 0x9E3779B97F4A7C15), with the standard finalizer
///   z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
///   z ^= z >> 27; z *= 0x94D049BB133111EB;
///   z ^= z >> 31.
/// Independent streams are keyed by (seed, tag, index):
///   state = mix64(mix64(seed ^ tag) + index * 0x9E3779B97F4A7C15).
/// Everything is plain 64-bit integer arithmetic, so sequences are identical
/// on every platform.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static SplitMix64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return SplitMix64(mix64(mix64(seed ^ tag) + index * kGolden));
  }

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform double in the open interval (0, 1), 53-bit resolution.
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  /// Uniform integer in [0, bound) by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  /// Zero-mean Laplace sample with scale b, by inverting the CDF.
  double laplace(double b);

 private:
  std::uint64_t state_;
};

}  // namespace pdepth
