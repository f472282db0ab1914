#pragma once

// Counter-based random streams.
//
// Every stream is identified by a 64-bit key derived from (seed, stream id).
// The n-th output of a stream is mix(key + n * kGolden), where mix is the
// SplitMix64 finalizer. Streams are therefore random-access, cheap to split,
// and fully determined by (seed, stream id, counter). All distribution
// transforms below are implemented here so that output bytes do not depend on
// the standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string_view>

namespace sdm {

inline constexpr std::string_view kRngAlgorithm = "sdm-splitmix64-ctr/1";

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed),
        stream_(stream),
        key_(detail::mix64(detail::mix64(seed ^ 0x5DEECE66DULL) +
                           detail::mix64(stream + detail::kGolden))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Independent child stream. Children of distinct ids never share a key
  /// with each other or with the parent except with negligible probability.
  Rng split(std::uint64_t child) const {
    Rng r(seed_, stream_);
    r.key_ = detail::mix64(key_ ^ detail::mix64(child + 0x632BE59BD9B4E019ULL));
    return r;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Multiply-shift; bias is below 2^-64 * n.
  std::uint64_t below(std::uint64_t n) {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>((*this)()) * n;
    return static_cast<std::uint64_t>(wide >> 64);
  }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; consumes two uniforms per draw.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seed of replication `index` under `master_seed`. Fixed rule: the first
/// output of stream (master_seed, index + 1).
inline std::uint64_t replication_seed(std::uint64_t master_seed,
                                      std::uint64_t index) {
  Rng r(master_seed, index + 1);
  return r();
}

/// Stream owned by replication `index`.
inline Rng replication_rng(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(replication_seed(master_seed, index));
}

}  // namespace sdm
