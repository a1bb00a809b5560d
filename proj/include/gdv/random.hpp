#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace gdv {

/// SplitMix64 finalizer over (seed, stream). Stream k of a seed is reproducible
/// without drawing streams 0..k-1. derive_seed(s, 0) == s.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seedable generator with portable distributions.
///
/// Engine: std::mt19937_64 (sequence fixed by the C++ standard).
/// uniform(): top 53 bits of one draw, scaled by 2^-53, in [0, 1).
/// normal(): Box-Muller, cosine branch only, two uniforms per sample.
/// uniform_int(): rejection sampling, unbiased.
/// Distribution algorithms are version 1; changing any of them changes every
/// seeded output in the project.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [lo, hi], inclusive.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, i - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gdv
