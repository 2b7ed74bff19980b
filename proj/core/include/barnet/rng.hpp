#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace barnet {

// SplitMix64 step (Steele/Lea/Flood). Used to derive independent seed
// streams; xor-folding a salt into the state splits a stream.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives the seed of a child stream from a base seed and a salt.
// mix_seed(s, a) != mix_seed(s, b) for a != b with overwhelming probability.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL + salt);
  std::uint64_t out = splitmix64(s);
  return out ^ splitmix64(s);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2) {
  return mix_seed(mix_seed(base, s1), s2);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t s1, std::uint64_t s2,
                              std::uint64_t s3) {
  return mix_seed(mix_seed(base, s1, s2), s3);
}

// FNV-1a, for deriving stream salts from string labels.
inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic draw helper around mt19937_64. Uniform doubles are derived
// from the raw 64-bit output directly so draws do not depend on the standard
// library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // [0, n)
  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace barnet
