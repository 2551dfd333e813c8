#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dpmf {

/// Every chain owns one engine; its textual state is what checkpoints store.
using Rng = std::mt19937_64;

/// Independent stream for chain `index` derived from the run seed.
/// `stream` separates unrelated runs sharing a seed (e.g. evaluation blocks).
inline Rng make_chain_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Distribution objects are created per call so that the engine state alone
// determines the stream (std::normal_distribution caches a second variate).

/// Uniform on the open interval (0, 1).
inline double uniform01(Rng& rng) {
  for (;;) {
    const double u = std::generate_canonical<double, 53>(rng);
    if (u > 0.0) return u;
  }
}

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline double std_normal(Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(rng);
}

inline double exponential1(Rng& rng) { return -std::log(uniform01(rng)); }

}  // namespace dpmf
