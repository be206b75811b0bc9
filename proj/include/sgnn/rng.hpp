#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "sgnn/common.hpp"

namespace sgnn {

// Seedable generator with named, independent sub-streams.
//
// The engine is std::mt19937_64 (its output sequence is fixed by the
// standard); doubles and bounded integers are derived by hand so that draws
// do not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n), unbiased.
  Index below(Index n);
  // Fisher-Yates.
  void shuffle(std::span<Index> values);

  // Stream derived from (seed, name, index) only; drawing from this
  // generator does not change what split() returns.
  Rng split(std::string_view name, std::uint64_t index = 0) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sgnn
