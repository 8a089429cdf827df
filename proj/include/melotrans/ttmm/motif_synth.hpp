/**
 * @file motif_synth.hpp
 * @brief One-bar motif from musical features.
 *
 * The note count comes from the density, pitches are drawn from the mode's
 * scale above the key note, and durations start at the average duration and
 * grow by eighth notes until they fill the bar.
 */

#pragma once

#include <array>
#include <string>
#include <vector>

#include "melotrans/symbolic/clip.hpp"
#include "melotrans/ttmm/features.hpp"

namespace melotrans::ttmm {

using symbolic::Tick;

inline constexpr std::array<int, 8> kMajorOffsets{0, 2, 4, 5, 7, 9, 11, 12};
inline constexpr std::array<int, 8> kMinorOffsets{0, 2, 3, 5, 7, 8, 10, 12};
/// A one-bar motif cannot hold more notes than the bar has sixteenths.
inline constexpr int kMaxMotifNotes = symbolic::kTicksPerBar;

struct MotifSpec {
  int key = 60;  ///< MIDI number of the key note (C4 = 60)
  int non = 2;
  std::array<int, 8> scale{};
  std::vector<int> pitches;
  std::vector<Tick> durations;
};

/// "C4", "D#3", "Bb4" or a plain MIDI number; C4 = 60.
int parse_key(const std::string& text);

std::array<int, 8> scale_for(Mode mode, int key);

/// max(2, round(nd * 4)), capped at kMaxMotifNotes.
int note_count(double nd);

/// Per-note durations summing to one bar.
std::vector<Tick> fill_durations(int non, double nad, Rng& rng);

MotifSpec plan_motif(const MusicalFeatures& features, int key, Rng& rng);

/// One-bar clip of contiguous notes with a motif label over the bar.
symbolic::Clip motif_clip(const MotifSpec& spec);

symbolic::Clip features_to_motif(const MusicalFeatures& features, int key, Rng& rng);

}  // namespace melotrans::ttmm
