#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace fabricsim {

// SplitMix64 step. Used instead of <random> engines/distributions so that
// seeded runs produce identical streams on every platform and standard
// library.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive combine of two 64-bit values into a well-mixed hash.
inline uint64_t hash_mix(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

inline uint64_t hash_mix(uint64_t a, uint64_t b, uint64_t c) {
  return hash_mix(hash_mix(a, b), c);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64(state_); }

  // Unbiased integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    assert(n > 0);
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = next();
    while (v >= limit) v = next();
    return v % n;
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  // Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace fabricsim
