// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation for config sampling. The generator
// algorithm is part of the artifact contract, so it is pinned here rather
// than delegated to a standard-library engine:
//
//   SplitMix64 (Steele/Lea/Flood): state += 0x9E3779B97F4A7C15;
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//   z = (z ^ z>>27) * 0x94D049BB133111EB; return z ^ z>>31.
//
// Uniform doubles take the top 53 bits, giving values in [0, 1).
// Per-placement streams are derived as
//   stream(seed, subject, k) = SplitMix64(seed ^ fnv1a64(subject) ^ (k+1)).next()
// so each (subject, placement index) pair is an independent sequence.

#pragma once

#include <cstdint>
#include <string_view>

namespace tfus {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin_flip() { return (next() & 1ull) != 0; }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view subject,
                                   std::uint64_t index) {
  return SplitMix64(seed ^ fnv1a64(subject) ^ (index + 1)).next();
}

}  // namespace tfus
