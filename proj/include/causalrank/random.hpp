#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "causalrank/types.hpp"

namespace causalrank {

// Mixes a stage tag into a master seed so every pipeline stage draws from
// its own independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Thin deterministic wrapper around mt19937_64. All distributions are
// implemented here (not via std:: distributions) so the draw sequence is
// fixed by the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal();

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // k distinct values drawn from 0..n-1, in draw order.
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  std::mt19937_64 gen_;
};

}  // namespace causalrank
