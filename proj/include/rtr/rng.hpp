// Seedable random number generation with named sub-streams.
//
// All randomness in this library flows through `Rng`, a thin wrapper around
// std::mt19937_64 whose raw output sequence is fixed by the C++ standard.
// Distributions (uniform doubles, normals, bounded integers) are implemented
// here rather than with std::*_distribution, so that a given seed produces
// the same values on every platform and standard library.
//
// Independent sub-streams are derived from a base seed with the SplitMix64
// finalizer. Stream assignments used by the generators in synth.hpp:
//
//   Core    - entries of the Tucker core tensor
//   Factors - Gaussian draws behind the orthonormal factor matrices
//   Support - which fibers are corrupted
//   Values  - the corruption values themselves
//   Mask    - which entries are observed
//
// Keeping these separate means e.g. the observation mask drawn for a given
// seed does not depend on the corruption ratio.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace rtr {

enum class Stream : std::uint64_t {
  Core = 1,
  Factors = 2,
  Support = 3,
  Values = 4,
  Mask = 5,
};

// SplitMix64 finalizer (Vigna / Steele et al.); bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed for sub-unit `a` / repetition `b` of a base seed,
// used to give every (grid cell, trial) its own generator.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ mix64(a)) ^ mix64(~b));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Unbiased integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline Rng stream_rng(std::uint64_t seed, Stream s) {
  return Rng(mix64(seed ^ mix64(static_cast<std::uint64_t>(s))));
}

}  // namespace rtr
