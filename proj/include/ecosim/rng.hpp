#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace ecosim {

// Deterministic, platform-independent RNG. std::<distribution> output is
// implementation-defined, so all draws the simulation depends on go through
// this class instead.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // splitmix64
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  int next_int(int lo, int hi) {  // inclusive range
    if (hi <= lo) return lo;
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool chance(double p) { return next_double() < p; }

private:
  std::uint64_t state_;
};

// FNV-1a 64-bit, used for prompt hashing and stream derivation.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x00000100000001B3ULL;
  }
  return h;
}

inline std::uint64_t mix_u64(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

// Per-purpose stream derivation: streams for (seed, purpose, a, b) never
// collide across agents/ticks, so adding draws in one place cannot perturb
// another. See policies/world concurrency notes.
inline Rng derive_stream(std::uint64_t seed, std::string_view purpose,
                         std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = fnv1a64(purpose);
  h = mix_u64(h, seed);
  h = mix_u64(h, a);
  h = mix_u64(h, b);
  return Rng(h);
}

}  // namespace ecosim
