#include "fgsim/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace fgsim {

namespace {

// SplitMix64 finalizer: a 64-bit permutation with strong avalanche.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream1,
                       std::uint64_t stream2, std::uint64_t stream3) {
  // Chain the key words through the mixer so that any change in any word
  // decorrelates the whole stream.
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ (stream1 + 0x243f6a8885a308d3ULL));
  k = mix64(k ^ (stream2 + 0x13198a2e03707344ULL));
  k = mix64(k ^ (stream3 + 0xa4093822299f31d0ULL));
  state_ = k;
}

std::uint64_t CounterRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double CounterRng::uniform() {
  // Top 53 bits give a uniform dyadic rational in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::uniform_below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling on the top bits to avoid modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

double CounterRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

std::size_t CounterRng::pick_weighted(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("pick_weighted: negative weight");
    total += w;
  }
  if (total <= 0.0) throw InvalidArgument("pick_weighted: zero total weight");
  double t = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    t -= weights[i];
    if (t < 0.0) return i;
  }
  return weights.size() - 1;
}

int max_threads() {
  if (const char* env = std::getenv("FGSIM_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace fgsim
