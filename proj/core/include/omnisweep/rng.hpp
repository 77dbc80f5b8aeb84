#pragma once

#include <cstdint>

namespace omnisweep {

// splitmix64 mix step. Stateless hashing keeps seeded noise and jitter
// independent of thread schedule: every sample is a pure function of its
// coordinates and the seed.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

// Uniform double in [0, 1) from 53 high bits.
inline double to_unit(uint64_t h) { return double(h >> 11) * 0x1.0p-53; }

// Small counter-based generator; reproducible across platforms (unlike
// std::uniform_real_distribution, whose output is implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t next_u64() { return mix64(state_++); }
  double uniform() { return to_unit(next_u64()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next_u64() % uint64_t(hi - lo + 1));
  }

 private:
  uint64_t state_;
};

}  // namespace omnisweep
