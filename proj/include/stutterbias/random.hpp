#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stutterbias {

// Deterministic random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here rather than taken from
// <random>, because the standard library's distributions differ between
// implementations. All draws are therefore identical on every platform:
//
//   uniform_index(n)   rejection sampling on the raw 64-bit output
//   uniform_real(a, b) a + (b - a) * (top 53 bits / 2^53)
//
// A RandomSource has a single owner; it can be moved but not copied, so a
// stream is never silently duplicated.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  RandomSource(const RandomSource&) = delete;
  RandomSource& operator=(const RandomSource&) = delete;
  RandomSource(RandomSource&&) = default;
  RandomSource& operator=(RandomSource&&) = default;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform real in [lo, hi).
  double uniform_real(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Per-key stream seed: seed XOR fnv1a64(key).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  return seed ^ fnv1a64(key);
}

}  // namespace stutterbias
