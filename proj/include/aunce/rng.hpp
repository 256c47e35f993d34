#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace aunce {

/// Seeded random stream with a fixed, platform-independent draw sequence.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the C++
/// standard. Every derived quantity (uniform reals, normals, integer indices,
/// shuffles) is computed here from raw 64-bit words rather than through the
/// <random> distribution classes, whose algorithms are implementation-defined.
///
/// Child streams come from fork(id): the child seed is a SplitMix64 mix of
/// (seed, id) and does not depend on how many draws the parent has made.
/// A stream is single-owner; give concurrent work its own fork.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Uniform on [lo, hi]; returns lo when lo == hi.
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (one output per call).
  double normal();
  bool bernoulli(double p);
  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  RngStream fork(std::uint64_t stream_id) const;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(index(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace aunce
