#pragma once

#include <cstdint>
#include <string_view>

#include "mfg/types.hpp"

namespace mfg {

// Deterministic counter-based RNG. All randomness in the library flows from a
// single root seed through named derived streams so results are
// platform-independent and schedule-independent (std::random distributions are
// implementation-defined, so sampling is done by hand on top of raw 64-bit
// draws).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, 1) with 53 bits of precision.
  Scalar next_uniform() { return Scalar(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  /// Categorical sample from nonnegative weights summing to ~1.
  template <typename Derived>
  int next_categorical(const Eigen::MatrixBase<Derived>& weights) {
    const Scalar u = next_uniform();
    Scalar acc = 0;
    const int n = static_cast<int>(weights.size());
    for (int i = 0; i < n; ++i) {
      acc += weights.derived()(i);
      if (u < acc) return i;
    }
    return n - 1;
  }

 private:
  std::uint64_t state_;
};

/// Mixes a root seed with a stream label and two indices into an independent
/// stream seed. Used to derive per-component / per-episode generators.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t a = 0,
                          std::uint64_t b = 0);

}  // namespace mfg
