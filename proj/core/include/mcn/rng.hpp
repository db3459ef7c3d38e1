#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace mcn {

/// Derives an independent stream seed from a master seed, a purpose tag and up
/// to two indices (epoch, sample, layer, ...). Streams with different tags or
/// indices are decorrelated, so per-sample work can run on any worker without
/// changing results.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a = 0,
                          std::uint64_t b = 0);

/// Seeded random stream. Draws are defined on top of the mt19937_64 output
/// sequence only, so a given seed produces the same values on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [lo, hi], both ends inclusive. Debiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return lo + static_cast<std::int64_t>(next_u64());  // full 2^64 span
    const std::uint64_t threshold = (0 - range) % range;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return lo + static_cast<std::int64_t>(x % range);
    }
  }

  template <typename RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const std::int64_t n = static_cast<std::int64_t>(last - first);
    for (std::int64_t i = n - 1; i > 0; --i) {
      const std::int64_t j = uniform_int(0, i);
      std::swap(first[i], first[j]);
    }
  }

  template <typename Container>
  void shuffle(Container& c) {
    shuffle(c.begin(), c.end());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcn
