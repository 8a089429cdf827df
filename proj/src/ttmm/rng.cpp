/**
 * @file rng.cpp
 */

#include "melotrans/ttmm/rng.hpp"

#include <stdexcept>

namespace melotrans::ttmm {

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform_left_open(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("Rng::uniform_left_open needs lo < hi");
  double x = hi - uniform01() * (hi - lo);
  while (x <= lo) x = hi - uniform01() * (hi - lo);  // rounding can land on lo
  return x;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below needs a positive bound");
  // Rejection keeps every residue equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next();
  while (x >= limit) x = next();
  return x % n;
}

}  // namespace melotrans::ttmm
