#pragma once

#include <cstdint>
#include <vector>

namespace cade {

/// Counter-based SplitMix64 stream.
///
/// Output i of a stream seeded with s is mix(s + (i+1) * 0x9E3779B97F4A7C15),
/// where mix is the SplitMix64 finalizer (Steele, Lea & Flood 2014). The i-th
/// draw depends only on (seed, i), so any prefix of a longer run is identical
/// to a shorter run with the same seed, and sub-streams can be derived by
/// re-seeding with a drawn value.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi]; a point interval returns exactly lo.
  double next_in(double lo, double hi) {
    if (lo == hi) return lo;
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  /// Derive an independent sub-stream seed tagged by `tag`.
  std::uint64_t derive(std::uint64_t tag) {
    SplitMix64 d(seed_ ^ (tag * 0xD6E8FEB86659FD93ULL));
    return d.next_u64();
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

/// Fisher-Yates shuffle of indices 0..n-1.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, SplitMix64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace cade
