#pragma once
// Deterministic random number stack. Fixed, well-known algorithms
// (splitmix64 for seeding, xoshiro256++ for streams) so that a given seed
// reproduces the same sequence on every platform and build.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace ctrkd {

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Folds a tuple of integers into a single 64-bit seed. Used everywhere a
// substream is derived from (seed, tag, index...), e.g. one stream per
// embedding row. Order-sensitive by construction.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
  uint64_t s = 0x243F6A8885A308D3ull;
  for (uint64_t p : parts) {
    s ^= p + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
    s = splitmix64_next(s);
  }
  return s;
}

// Stream tags for mix_seed so independent uses of the same user seed never
// collide.
enum SeedTag : uint64_t {
  kSeedEmbedding = 1,
  kSeedDense = 2,
  kSeedWorld = 3,
  kSeedShuffle = 4,
  kSeedTeacher = 5,
  kSeedStudent = 6,
};

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. Consumes two draws per value; the second
  // solution is discarded to keep the stream position a simple function of
  // the call count.
  double normal() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Unbiased-enough integer in [0, n) via 128-bit multiply.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Knuth's method; fine for the small rates used here.
  uint64_t poisson(double lambda) {
    const double limit = std::exp(-lambda);
    uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

}  // namespace ctrkd
