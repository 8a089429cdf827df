/**
 * @file quantize.hpp
 * @brief Snap fractional-tick material onto the sixteenth-note grid.
 */

#pragma once

#include <vector>

#include "melotrans/symbolic/clip.hpp"

namespace melotrans::symbolic {

/// Note timing in fractional ticks, as read from raw MIDI pulses.
struct RawNote {
  double start = 0.0;
  double duration = 1.0;
  int pitch = 60;
  int velocity = kDefaultVelocity;
};

struct RawChord {
  int root = 0;
  ChordQuality quality = ChordQuality::kMajor;
  double start = 0.0;
  double duration = kTicksPerBar;
};

struct RawInterval {
  double start = 0.0;
  double end = 0.0;
};

struct RawClip {
  std::vector<RawNote> melody;
  std::vector<RawChord> chords;
  std::vector<RawInterval> motif_regions;
  /// Index j-1 holds the regions of variant type j.
  std::vector<RawInterval> variant_regions[kVariantTypeCount];
  double length = 0.0;
};

/// Lifts an integer clip into the fractional representation.
RawClip to_raw(const Clip& clip);

/// Rounds starts and durations to the nearest tick (duration at least one
/// tick), then truncates each note at the next onset. Notes sharing an onset
/// after rounding keep only the highest pitch.
Clip quantize_clip(const RawClip& raw);

/// Same normalisation applied to an already-integer clip.
Clip quantize_clip(const Clip& clip);

}  // namespace melotrans::symbolic
