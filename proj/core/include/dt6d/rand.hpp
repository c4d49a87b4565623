#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "dt6d/math.hpp"

namespace dt6d {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream (xoshiro256++). All sampling in the project
/// goes through this type so results are identical across platforms and
/// standard libraries. Substreams are derived by hashing a tag into the
/// seed, which keeps independent draws (pose vs. augmentation) decoupled.
class RandomStream {
public:
  explicit RandomStream(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) { return n ? next_u64() % n : 0; }

  /// Standard normal via Box-Muller (one value per call, no caching, so
  /// the stream position is insensitive to call mixing).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Unit vector uniform on the sphere: theta ~ U(-pi,pi), cos(phi) ~ U(-1,1).
  Vec3 unit_sphere() {
    double theta = uniform(-kPi, kPi);
    double cosphi = 2.0 * uniform() - 1.0;
    double sinphi = std::sqrt(std::max(0.0, 1.0 - cosphi * cosphi));
    return {sinphi * std::cos(theta), sinphi * std::sin(theta), cosphi};
  }

  /// Derived independent stream for (seed, index, tag) addressing.
  static RandomStream substream(uint64_t seed, uint64_t index, std::string_view tag) {
    uint64_t h = seed;
    h = splitmix64(h) ^ (index + 0x6a09e667f3bcc909ULL);
    h = splitmix64(h);
    for (char c : tag) {
      h = splitmix64(h) ^ static_cast<uint64_t>(static_cast<unsigned char>(c));
    }
    h = splitmix64(h);
    return RandomStream(h);
  }

private:
  static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  uint64_t s_[4]{};
};

}  // namespace dt6d
