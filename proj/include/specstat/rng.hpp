#pragma once
#include <cstdint>
#include <random>

namespace specstat {

// Seed derivation and uniform variates.
//
// Per-trial seeds come from a SplitMix64-style mix of (master seed, trial
// index).  The rule is part of the reproducibility contract and is frozen:
//
//   trial_seed(master, i) = mix64(master + (i + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer.  Uniform doubles are produced
// from raw 64-bit generator output ((x >> 11) * 2^-53) instead of
// std::uniform_real_distribution, whose output is not pinned by the C++
// standard; this keeps every artifact bit-reproducible across platforms.

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + kGoldenGamma * (index + 1));
}

template <class URBG>
inline double uniform01(URBG& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform on [-M, M].
template <class URBG>
inline double uniform_sym(URBG& g, double M) {
  return (2.0 * uniform01(g) - 1.0) * M;
}

using Rng = std::mt19937_64;

}  // namespace specstat
