#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace herdsim {

// Deterministic, platform-independent PRNG (xoshiro256** seeded via
// SplitMix64) with named substreams. A stream is identified by the global
// seed plus a path of string components; the same (seed, path) yields the
// same sequence on every platform, so adding experiments never perturbs
// existing streams. std::<distribution> adapters are deliberately not used:
// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::initializer_list<std::string_view> path);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  /// Uniform integer in [0, bound), unbiased via rejection. bound > 0.
  std::uint64_t next_below(std::uint64_t bound);

  /// Standard normal deviate (Marsaglia polar method).
  double next_gaussian();

  /// Stream key for (seed, path); exposed so callers can log stream ids.
  static std::uint64_t derive_key(std::uint64_t seed,
                                  std::initializer_list<std::string_view> path);

 private:
  void seed_state(std::uint64_t key);

  std::uint64_t state_[4];
  double spare_gaussian_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace herdsim
