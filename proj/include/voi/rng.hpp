#pragma once

#include <cstdint>
#include <random>

namespace voi {

// splitmix64 finalizer; used to derive independent substreams from one seed.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(mix64(a) ^ b); }
inline uint64_t mix64(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(mix64(seed)); }

// Samples an index from a discrete distribution given as raw probabilities.
// Assumes probs sums to ~1; falls back to the last positive entry on roundoff.
template <typename Rng>
int sample_index(const std::vector<double>& probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = unit(rng);
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    acc += probs[i];
    if (u < acc) return i;
  }
  return last_positive >= 0 ? last_positive : static_cast<int>(probs.size()) - 1;
}

}  // namespace voi
