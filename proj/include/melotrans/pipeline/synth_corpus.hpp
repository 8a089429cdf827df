/**
 * @file synth_corpus.hpp
 * @brief Synthetic motif/variant phrases for desk-scale training and labeler
 * stress tests.
 *
 * Bar 0 holds a one-bar motif. Later bars hold a transformed copy, unrelated
 * material whose onsets neither contain nor are contained in the motif's, or
 * silence. Each transform is built so its variant type follows from the
 * construction: motifs have at least three notes and no repeated adjacent
 * pitches.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "melotrans/symbolic/clip.hpp"
#include "melotrans/ttmm/rng.hpp"

namespace melotrans::pipeline {

enum class Transform : std::uint8_t {
  kCopy,       ///< type 1
  kTranspose,  ///< type 2: every pitch shifted by a nonzero amount
  kPerturb,    ///< contour kept, one or two pitches nudged: type 1 or 2 by pitch agreement
  kReshape,    ///< rhythm kept, some trend signs flipped so 0.2 <= TMR < 0.6: type 3
  kInsert,     ///< one extra note, trend still contains the motif's: type 4
  kRemove,     ///< one note dropped, trend contained in the motif's: type 4
  kInvert,     ///< every trend sign flipped: type 5
  kFree,       ///< unrelated onsets: no label
  kRest,       ///< empty bar: no label
};

inline constexpr int kTransformCount = 9;

const char* transform_name(Transform t);

struct MotifNote {
  symbolic::Tick onset = 0;  ///< within the bar
  symbolic::Tick duration = 1;
  int pitch = 60;
};

struct Placement {
  int bar = 0;
  Transform transform = Transform::kCopy;
  int type = 0;  ///< expected variant type, 0 for unlabelled bars
};

struct SynthClip {
  symbolic::Clip clip;  ///< motif label plus the expected variant labels
  std::vector<Placement> placements;
};

struct SynthOptions {
  int bars = 16;
  /// Make bars 1..5 a shuffled set covering every variant type, so each
  /// phrase has all five types available.
  bool cover_all_types = true;
};

std::vector<MotifNote> random_motif(ttmm::Rng& rng);

/// Applies a transform to motif notes; returns the notes and the expected type.
std::pair<std::vector<MotifNote>, int> apply_transform(const std::vector<MotifNote>& motif, Transform t,
                                                       ttmm::Rng& rng);

SynthClip synth_clip(ttmm::Rng& rng, const SynthOptions& options = {});

/// Clip i of a corpus uses Rng(seed + i), so corpora are prefix-stable.
std::vector<SynthClip> synth_corpus(int clips, std::uint64_t seed, const SynthOptions& options = {});

nlohmann::json placements_json(const SynthClip& clip);

}  // namespace melotrans::pipeline
