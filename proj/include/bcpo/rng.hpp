#pragma once

#include <cstdint>
#include <random>

namespace bcpo {

// splitmix64; used to derive independent per-component streams from one seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(mix64(mix64(seed) + stream));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}

inline double normal(std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(rng);
}

inline long rand_index(std::mt19937_64& rng, long n) {
  std::uniform_int_distribution<long> d(0, n - 1);
  return d(rng);
}

}  // namespace bcpo
