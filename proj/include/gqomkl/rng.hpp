#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gqomkl {

// 64-bit finalizer (splitmix64 step). Used to turn structured ids into
// well-spread seeds so that every (purpose, node, kernel) triple gets an
// independent stream from one master seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

enum class StreamPurpose : std::uint64_t {
  shuffle = 1,      // dataset partitioning
  feature_map = 2,  // random feature frequencies
  quantizer = 3,    // stochastic rounding
  synthetic = 4,    // synthetic data generation
  init = 5,         // model initialisation in tests/baselines
  generic = 6,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(master);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

inline std::uint64_t derive_seed(std::uint64_t master, StreamPurpose p,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_seed(master, static_cast<std::uint64_t>(p), b, c);
}

// xoshiro256** with explicit double conversions.  All draws are defined in
// terms of integer arithmetic plus sqrt/log/sin/cos, so one seed produces the
// same sequence everywhere the test suite runs.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) {
    // expand the seed with splitmix64, the recommended seeding procedure
    std::uint64_t x = seed;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on [0, 1): 53 random mantissa bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], safe as log() argument
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; caches the second variate so every pair
  // of draws consumes exactly two uniforms
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // uniform integer in [0, bound); bound must be positive
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    return next_u64() % bound;
  }

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gqomkl
