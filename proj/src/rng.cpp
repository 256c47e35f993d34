#include "aunce/rng.hpp"

#include <cmath>
#include <numbers>

#include "aunce/errors.hpp"

namespace aunce {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = next_u64() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (hi < lo) throw ConfigError("RngStream::uniform: hi < lo");
  if (lo == hi) return lo;
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

std::uint64_t RngStream::index(std::uint64_t n) {
  if (n == 0) throw ContractViolation("RngStream::index: empty range");
  // Rejection sampling on the top of the 64-bit range keeps the draw unbiased.
  const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
  std::uint64_t x = next_u64();
  while (rem != 0 && x > UINT64_MAX - rem) x = next_u64();
  return x % n;
}

RngStream RngStream::fork(std::uint64_t stream_id) const {
  return RngStream(splitmix64(seed_ ^ splitmix64(stream_id + 0x632BE59BD9B4E019ULL)));
}

}  // namespace aunce
