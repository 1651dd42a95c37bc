#pragma once

#include <cstdint>

#include "exphedge/math.hpp"

namespace exphedge {

// splitmix64 finalizer. Used to expand seeds into well-mixed stream states.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256**. Each simulated path gets its own stream, so path i's draws
// do not depend on how many paths precede it or on thread scheduling.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) {
      word = splitmix64_mix(sm);
      sm = word;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse CDF; consumes exactly one next().
  double normal() { return norm_inv(uniform01()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Stream for one path: (seed, index) hashed into a single 64-bit state.
inline Xoshiro256ss make_path_stream(std::uint64_t seed, std::uint64_t index) {
  return Xoshiro256ss(splitmix64_mix(seed) ^ splitmix64_mix(~index));
}

// Name recorded in run metadata so outputs identify their random source.
inline const char* rng_algorithm_name() {
  return "xoshiro256** (splitmix64-seeded per-path streams, inverse-CDF normals)";
}

}  // namespace exphedge
