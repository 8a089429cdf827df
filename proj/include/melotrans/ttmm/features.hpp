/**
 * @file features.hpp
 * @brief Valence/arousal to mode, note density and average note duration.
 */

#pragma once

#include <array>

#include "melotrans/ttmm/rng.hpp"
#include "melotrans/ttmm/va_provider.hpp"

namespace melotrans::ttmm {

enum class Mode { kMajor, kMinor };

const char* mode_name(Mode mode);

struct MusicalFeatures {
  Mode mode = Mode::kMajor;
  double nd = 1.0;   ///< notes per beat
  double nad = 1.0;  ///< average note duration in beats
};

struct FeatureOptions {
  /// Flip the valence rule so that high valence gives a major key.
  bool invert_valence_mode = false;
};

inline constexpr std::array<double, 4> kMarginNd{0.0, 3.5, 5.0, 8.0};
inline constexpr std::array<double, 4> kMarginNad{0.0, 0.8, 1.2, 2.0};

/// Major when valence <= 5 (or > 5 with invert_valence_mode).
Mode mode_for_valence(double valence, bool invert_valence_mode = false);

/// ceil(arousal / 3), in 1..3 for arousal in (0,9].
int arousal_bin(double arousal);

/// nd in (kMarginNd[idx-1], kMarginNd[idx]], nad in (kMarginNad[3-idx], kMarginNad[4-idx]].
MusicalFeatures va_to_features(const VAPoint& va, Rng& rng, const FeatureOptions& options = {});

}  // namespace melotrans::ttmm
