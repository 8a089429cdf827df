/**
 * @file rng.hpp
 * @brief Seeded random source with portable draws.
 *
 * std::uniform_*_distribution differ between standard libraries, so the
 * draws here are computed directly from mt19937_64 output. The same seed
 * yields the same motif on any platform.
 */

#pragma once

#include <cstdint>
#include <random>

namespace melotrans::ttmm {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform in (lo, hi].
  double uniform_left_open(double lo, double hi);
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace melotrans::ttmm
