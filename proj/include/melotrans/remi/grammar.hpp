/**
 * @file grammar.hpp
 * @brief Incremental well-formedness check for REMI token streams.
 *
 * Grammar (after BOS):
 *   seq    := bar* EOS
 *   bar    := Bar item*
 *   item   := group | Type(j) MotifStart group | MotifStart group | MotifEnd
 *   group  := Position [Chord Duration] [Pitch Duration]   (at least one event)
 *
 * plus the semantic rules: positions strictly increase inside a bar, notes
 * never overlap, chords never overlap, a label region opens directly before
 * the group of its first melody note, closes directly after the Duration of
 * its last melody note, and regions do not nest. A motif region (no Type)
 * holds at least two notes and spans at most two bars.
 */

#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "melotrans/remi/vocab.hpp"

namespace melotrans::remi {

struct GrammarLimits {
  /// When > 0, Bar is refused after this many bars, EOS is refused before
  /// it, and no note or chord may extend past the last bar.
  int exact_bars = 0;
  bool allow_chords = true;
};

class GrammarState {
 public:
  explicit GrammarState(GrammarLimits limits = {}) : limits_(limits) {}

  /// Reason the token would break the grammar, or nullopt when it is allowed.
  std::optional<std::string> why_not(Token t) const;
  bool allows(Token t) const { return !why_not(t).has_value(); }

  /// Applies an allowed token; throws std::logic_error otherwise.
  void push(Token t);

  bool started() const { return started_; }
  bool finished() const { return finished_; }
  bool in_region() const { return in_region_; }
  int region_type() const { return region_type_; }
  int region_notes() const { return region_notes_; }
  int bars() const { return bars_; }
  /// True when the state sits between groups (a new Bar/Position/label may follow).
  bool at_boundary() const;
  /// Tick of the most recent Position (absolute), or -1.
  symbolic::Tick current_tick() const { return cur_tick_; }
  /// Latest end tick of any completed note or chord.
  symbolic::Tick content_end() const { return std::max(last_note_end_, last_chord_end_); }

 private:
  enum class Phase {
    kIdle,
    kAfterType,
    kAfterMotifStart,
    kAfterPosition,
    kAfterChord,
    kAfterChordDuration,
    kAfterPitch,
    kAfterNoteDuration,
  };

  symbolic::Tick bar_start() const { return (bars_ - 1) * symbolic::kTicksPerBar; }
  symbolic::Tick max_tick() const { return limits_.exact_bars * symbolic::kTicksPerBar; }
  bool position_viable(symbolic::Tick tick) const;

  GrammarLimits limits_;
  bool started_ = false;
  bool finished_ = false;
  Phase phase_ = Phase::kIdle;
  int bars_ = 0;
  int last_position_ = 0;  // 1-based position of the last group in this bar, 0 if none
  symbolic::Tick cur_tick_ = -1;
  symbolic::Tick last_note_end_ = 0;
  symbolic::Tick last_chord_end_ = 0;
  int pending_type_ = 0;
  bool in_region_ = false;
  int region_type_ = 0;
  int region_notes_ = 0;
  symbolic::Tick region_start_ = 0;
};

}  // namespace melotrans::remi
