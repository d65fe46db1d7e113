#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace mevattr {

// Hand-rolled draws on top of mt19937_64: the standard distributions are implementation-defined,
// and generated scenarios must be identical across toolchains.

inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) {
      return x % bound;
    }
  }
}

/// Uniform in [lo, hi].
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mevattr
