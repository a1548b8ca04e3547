#pragma once

#include <cstdint>
#include <initializer_list>

namespace repvis {

/// Counter-based random stream.  Each stream is keyed by a (seed, id...)
/// tuple and draws are pure functions of (key, counter), so simulations can
/// be parallelised across units and replayed bit-for-bit no matter how work
/// is scheduled.  Mixing is the splitmix64 finalizer, which is plenty for
/// Monte Carlo use here.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Fold seed and stream ids into one key.  Order matters.
  static CounterRng keyed(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t k = mix(seed + kGamma);
    for (std::uint64_t id : ids) k = mix(k ^ (id + kGamma));
    return CounterRng(k);
  }

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform draw on [0,1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Uniform draw on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// Draw-site tags keeping independent decisions on independent substreams.
namespace rng_site {
constexpr std::uint64_t kType = 1;
constexpr std::uint64_t kInitialBelief = 2;
constexpr std::uint64_t kSignal = 3;
constexpr std::uint64_t kOutcome = 4;
constexpr std::uint64_t kSurvival = 5;
constexpr std::uint64_t kLabelFlip = 6;
constexpr std::uint64_t kNoise = 7;
}  // namespace rng_site

}  // namespace repvis
