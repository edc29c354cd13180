#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace xqd {

/// Name recorded in run metadata. Sampling is done from raw 64-bit words
/// with the transforms documented on Rng, so streams do not depend on the
/// standard library's distribution implementations.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64/splitmix64-substreams/u53-inverse-exp/box-muller-v1";

/// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Sub-seed for (seed, stream, index). Distinct tuples give decorrelated
/// generators; used for shards, scan positions and emission kinds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exponential with the given mean, by inversion.
  double exponential(double mean);

  /// Standard normal by Box-Muller (one output per call, no caching).
  double normal();

  bool bernoulli(double p) { return p >= 1.0 || (p > 0.0 && uniform() < p); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xqd
