/**
 * @file features.cpp
 */

#include "melotrans/ttmm/features.hpp"

#include <cmath>

namespace melotrans::ttmm {

const char* mode_name(Mode mode) { return mode == Mode::kMajor ? "major" : "minor"; }

Mode mode_for_valence(double valence, bool invert_valence_mode) {
  const bool low = valence <= 5.0;
  return low != invert_valence_mode ? Mode::kMajor : Mode::kMinor;
}

int arousal_bin(double arousal) {
  if (!(arousal > 0.0 && arousal <= 9.0)) throw RangeError("arousal " + std::to_string(arousal) + " outside (0,9]");
  return static_cast<int>(std::ceil(arousal / 3.0));
}

MusicalFeatures va_to_features(const VAPoint& va, Rng& rng, const FeatureOptions& options) {
  check_va(va);
  const int idx = arousal_bin(va.arousal);
  MusicalFeatures f;
  f.mode = mode_for_valence(va.valence, options.invert_valence_mode);
  f.nd = rng.uniform_left_open(kMarginNd[idx - 1], kMarginNd[idx]);
  f.nad = rng.uniform_left_open(kMarginNad[3 - idx], kMarginNad[4 - idx]);
  return f;
}

}  // namespace melotrans::ttmm
