#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mtnam {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream ("data", "init",
/// "downsample", ...) from the global seed.
inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finaliser
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (h | 1ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream) { return Rng(sub_seed(seed, stream)); }

}  // namespace mtnam
