/**
 * @file grammar.cpp
 * @brief REMI well-formedness state machine.
 */

#include "melotrans/remi/grammar.hpp"

#include <stdexcept>

namespace melotrans::remi {

using symbolic::kMaxMotifTicks;
using symbolic::Tick;

bool GrammarState::at_boundary() const {
  switch (phase_) {
    case Phase::kIdle:
    case Phase::kAfterNoteDuration:
      return true;
    case Phase::kAfterChordDuration:
      return !(in_region_ && region_notes_ == 0);
    default:
      return false;
  }
}

bool GrammarState::position_viable(Tick tick) const {
  if (phase_ == Phase::kAfterMotifStart) return tick >= last_note_end_;
  return tick >= last_note_end_ || (limits_.allow_chords && tick >= last_chord_end_);
}

std::optional<std::string> GrammarState::why_not(Token t) const {
  if (finished_) return "token after EOS";
  if (!started_) {
    if (t.kind == TokenKind::kBos) return std::nullopt;
    return "sequence must start with BOS";
  }
  const bool boundary = at_boundary();
  const bool motif_region = in_region_ && region_type_ == 0;

  switch (t.kind) {
    case TokenKind::kBos:
      return "BOS inside sequence";

    case TokenKind::kEos:
      if (in_region_) return "EOS inside an open label region (missing MotifEnd)";
      if (!boundary) return "EOS in the middle of an event group";
      if (limits_.exact_bars > 0 && bars_ != limits_.exact_bars) return "EOS before the requested bar count";
      return std::nullopt;

    case TokenKind::kBar:
      if (!boundary) return "Bar in the middle of an event group";
      if (limits_.exact_bars > 0 && bars_ >= limits_.exact_bars) return "bar limit reached";
      return std::nullopt;

    case TokenKind::kType:
      if (t.value < 1 || t.value > symbolic::kVariantTypeCount) return "Type outside 1..5";
      if (in_region_) return "nested label region";
      if (!boundary) return "Type in the middle of an event group";
      if (bars_ == 0) return "Type before the first Bar";
      return std::nullopt;

    case TokenKind::kMotifStart:
      if (phase_ == Phase::kAfterType) return std::nullopt;
      if (in_region_) return "nested label region";
      if (!boundary) return "MotifStart in the middle of an event group";
      if (bars_ == 0) return "MotifStart before the first Bar";
      return std::nullopt;

    case TokenKind::kMotifEnd:
      if (!in_region_) return "MotifEnd without open region";
      if (phase_ != Phase::kAfterNoteDuration) return "MotifEnd must follow the Duration of a melody note";
      if (motif_region && region_notes_ < 2) return "motif region needs at least two notes";
      return std::nullopt;

    case TokenKind::kPosition: {
      if (t.value < 1 || t.value > kPositionsPerBar) return "Position outside 1..16";
      if (!(boundary || phase_ == Phase::kAfterMotifStart)) return "Position in the middle of an event group";
      if (bars_ == 0) return "Position before the first Bar";
      if (t.value <= last_position_) return "Position does not advance within the bar";
      if (!position_viable(bar_start() + t.value - 1)) return "Position overlaps a sounding note";
      return std::nullopt;
    }

    case TokenKind::kChord:
      if (phase_ != Phase::kAfterPosition) return "Chord must directly follow Position";
      if (!limits_.allow_chords) return "chords disabled";
      if (cur_tick_ < last_chord_end_) return "Chord overlaps the previous chord";
      return std::nullopt;

    case TokenKind::kPitch:
      if (t.value < 0 || t.value > 127) return "Pitch outside 0..127";
      if (phase_ != Phase::kAfterPosition && phase_ != Phase::kAfterChordDuration) {
        return "Pitch must follow Position or a chord Duration";
      }
      if (cur_tick_ < last_note_end_) return "Pitch overlaps the previous note";
      if (motif_region && region_notes_ > 0 && cur_tick_ >= region_start_ + kMaxMotifTicks) {
        return "motif region longer than two bars";
      }
      return std::nullopt;

    case TokenKind::kDuration: {
      if (t.value < 1 || t.value > kMaxDuration) return "Duration outside 1..32";
      if (phase_ != Phase::kAfterPitch && phase_ != Phase::kAfterChord) return "Duration without Pitch or Chord";
      const Tick end = cur_tick_ + t.value;
      if (limits_.exact_bars > 0 && end > max_tick()) return "event extends past the final bar";
      if (phase_ == Phase::kAfterPitch && motif_region) {
        const Tick start = region_notes_ == 0 ? cur_tick_ : region_start_;
        const Tick limit = start + kMaxMotifTicks - (region_notes_ == 0 ? 1 : 0);
        if (end > limit) return "motif region longer than two bars";
      }
      return std::nullopt;
    }
  }
  return "unknown token";
}

void GrammarState::push(Token t) {
  if (auto reason = why_not(t)) throw std::logic_error("grammar violation at " + to_string(t) + ": " + *reason);
  switch (t.kind) {
    case TokenKind::kBos:
      started_ = true;
      break;
    case TokenKind::kEos:
      finished_ = true;
      break;
    case TokenKind::kBar:
      ++bars_;
      last_position_ = 0;
      phase_ = Phase::kIdle;
      break;
    case TokenKind::kType:
      pending_type_ = t.value;
      phase_ = Phase::kAfterType;
      break;
    case TokenKind::kMotifStart:
      in_region_ = true;
      region_type_ = pending_type_;
      pending_type_ = 0;
      region_notes_ = 0;
      phase_ = Phase::kAfterMotifStart;
      break;
    case TokenKind::kMotifEnd:
      in_region_ = false;
      phase_ = Phase::kIdle;
      break;
    case TokenKind::kPosition:
      last_position_ = t.value;
      cur_tick_ = bar_start() + t.value - 1;
      phase_ = Phase::kAfterPosition;
      break;
    case TokenKind::kChord:
      phase_ = Phase::kAfterChord;
      break;
    case TokenKind::kPitch:
      if (in_region_ && region_notes_ == 0) region_start_ = cur_tick_;
      phase_ = Phase::kAfterPitch;
      break;
    case TokenKind::kDuration:
      if (phase_ == Phase::kAfterChord) {
        last_chord_end_ = cur_tick_ + t.value;
        phase_ = Phase::kAfterChordDuration;
      } else {
        last_note_end_ = cur_tick_ + t.value;
        if (in_region_) ++region_notes_;
        phase_ = Phase::kAfterNoteDuration;
      }
      break;
  }
}

}  // namespace melotrans::remi
