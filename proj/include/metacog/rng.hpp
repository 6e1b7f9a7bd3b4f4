#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace metacog {

// One splitmix64 step: advances `state` and returns the next output.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derives the seed of a labeled substream from (master seed, seed index,
// stream label). Every random decision in a run draws from one of these
// streams, so paired comparisons and replay are exact. The derivation is
// three chained splitmix64 steps and is part of the artifact contract.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t seed_index,
                                        std::string_view label) {
  std::uint64_t s = master_seed;
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (seed_index + 0x9e3779b97f4a7c15ull);
  std::uint64_t b = splitmix64_next(s);
  s = b ^ fnv1a64(label);
  return splitmix64_next(s);
}

// Deterministic generator over one derived substream. The distribution
// transforms are hand-rolled (not <random>) so that identical seeds produce
// identical draws on every standard library.
class Rng {
 public:
  Rng() : state_(0) {}
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t master_seed, std::uint64_t seed_index, std::string_view label)
      : state_(derive_stream_seed(master_seed, seed_index, label)) {}

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform index in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace metacog
