#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace parasent {

// xoshiro256** seeded through splitmix64. The algorithm is part of the
// reproducibility contract: a given seed yields the same stream everywhere.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "xoshiro256**/splitmix64";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t bounded(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Standard normal via Box-Muller (no cached second variate).
  double normal();

  // Independent child stream; does not disturb reproducibility of callers
  // that draw the same sequence of forks.
  Rng fork();

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

// Uniform Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> seeded_permutation(std::size_t n, Rng& rng);

}  // namespace parasent
