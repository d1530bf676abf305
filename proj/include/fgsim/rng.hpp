#pragma once

#include <cstdint>
#include <vector>

#include "fgsim/types.hpp"

namespace fgsim {

// Counter-based deterministic random generator.  A generator is keyed by up
// to three stream identifiers (typically: seed, sample index, gate index) and
// then produces an independent, reproducible stream.  Identical keys give
// identical streams regardless of what other streams were consumed, which is
// what makes parallel sampling reproducible.
//
// Construction mixes each key word through the SplitMix64 finalizer; draws
// advance a Weyl counter and mix it the same way.  This is not intended to be
// cryptographic, just well-distributed and stable across platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream1 = 0,
                      std::uint64_t stream2 = 0, std::uint64_t stream3 = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform();

  // Uniform on {0, 1, ..., bound-1}.
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal via Box-Muller (one spare cached).
  double normal();

  // Index drawn with probability weights[i] / sum(weights).  Weights must be
  // non-negative with positive sum.
  std::size_t pick_weighted(const std::vector<double>& weights);

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace fgsim
