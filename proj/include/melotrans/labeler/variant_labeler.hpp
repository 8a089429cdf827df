/**
 * @file variant_labeler.hpp
 * @brief Finds motif repetitions and classifies variant windows.
 *
 * A candidate window has the motif's length and slides from the motif end in
 * bar steps. Its notes (by onset) are compared with the motif's on relative
 * start times, pitches and pitch trends.
 */

#pragma once

#include <stdexcept>
#include <vector>

#include "melotrans/symbolic/clip.hpp"

namespace melotrans::labeler {

using symbolic::Clip;
using symbolic::MotifLabel;
using symbolic::NoteEvent;
using symbolic::Tick;
using symbolic::VariantLabel;

class LabelError : public std::invalid_argument {
 public:
  explicit LabelError(const std::string& what) : std::invalid_argument(what) {}
};

struct MatchRatios {
  double pmr = 0.0;
  double tmr = 0.0;
};

struct WindowView {
  Tick win_start = 0;
  Tick win_len = 0;
  std::vector<Tick> st;      ///< onsets relative to win_start
  std::vector<int> pitch;
  std::vector<int> trend;    ///< empty when the window holds fewer than two notes
};

/// sign(p[i+1] - p[i]) for each neighbour pair; needs at least two pitches.
std::vector<int> pitch_trend(const std::vector<int>& pitches);

/// Notes whose onset falls in [start, start + len).
WindowView make_window(const Clip& clip, Tick start, Tick len);

/// Positional pitch and trend agreement. The motif's relative onsets must
/// have the same length as the window's.
MatchRatios match_ratios(const std::vector<NoteEvent>& motif, const WindowView& window);

/// Type 1, 2, 3 or 5 from the ratio thresholds.
int classify(const MatchRatios& ratios);

/// True when `small` appears in `big` in order, not necessarily contiguously.
bool is_subsequence(const std::vector<int>& small, const std::vector<int>& big);

/// Every offset (other than the motif's own) whose window content equals the
/// motif in relative onsets, durations and pitches.
std::vector<MotifLabel> detect_repetitions(const Clip& clip, const MotifLabel& motif);

struct LabelerOptions {
  bool half_bar_step = false;
};

/// Variant labels for one motif. Windows overlapping an already emitted
/// label are skipped, so results are disjoint and in time order.
std::vector<VariantLabel> label_variants(const Clip& clip, const MotifLabel& motif, const LabelerOptions& options = {});

/// Runs label_variants for every motif label and replaces the clip's variant
/// labels with the union. A window that would overlap any motif label or a
/// variant found for an earlier motif is dropped.
Clip label_clip(Clip clip, const LabelerOptions& options = {});

}  // namespace melotrans::labeler
