/**
 * @file codec.cpp
 * @brief REMI encoding, decoding, splitting and repair.
 */

#include "melotrans/remi/codec.hpp"

#include <algorithm>
#include <optional>

namespace melotrans::remi {

using symbolic::ChordEvent;
using symbolic::Clip;
using symbolic::kTicksPerBar;
using symbolic::NoteEvent;
using symbolic::Tick;

namespace {

struct NoteRegion {
  int type = 0;
  std::size_t first = 0;
  std::size_t last = 0;
};

std::vector<NoteRegion> note_regions(const Clip& clip) {
  std::vector<NoteRegion> regions;
  auto add = [&](int type, Tick start, Tick end, const char* what) {
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < clip.melody.size(); ++i) {
      if (clip.melody[i].start >= start && clip.melody[i].start < end) {
        if (!first) first = i;
        last = i;
      }
    }
    if (!first) {
      throw EncodeError(std::string(what) + " region [" + std::to_string(start) + ", " + std::to_string(end) +
                        ") contains no melody note");
    }
    regions.push_back({type, *first, *last});
  };
  for (const auto& m : clip.motif_labels) add(0, m.start, m.end, "motif");
  for (const auto& v : clip.variant_labels) add(v.type, v.start, v.end, "variant");
  std::sort(regions.begin(), regions.end(), [](const NoteRegion& a, const NoteRegion& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < regions.size(); ++i) {
    if (regions[i].first <= regions[i - 1].last) {
      throw EncodeError("overlapping label regions at melody note " + std::to_string(regions[i].first));
    }
  }
  return regions;
}

GrammarState replay(const TokenSeq& seq) {
  GrammarState g;
  for (const auto& t : seq) g.push(t);
  return g;
}

}  // namespace

TokenSeq encode(const Clip& clip, const EncodeOptions& options) {
  symbolic::validate(clip);
  for (const auto& n : clip.melody) {
    if (n.duration > kMaxDuration) {
      throw EncodeError("note at tick " + std::to_string(n.start) + " lasts " + std::to_string(n.duration) +
                        " ticks; Duration tokens stop at " + std::to_string(kMaxDuration));
    }
  }
  if (options.include_chords) {
    for (const auto& c : clip.chords) {
      if (c.duration > kMaxDuration) {
        throw EncodeError("chord at tick " + std::to_string(c.start) + " longer than " + std::to_string(kMaxDuration));
      }
    }
  }

  const auto regions = note_regions(clip);
  std::vector<const NoteRegion*> opens(clip.melody.size(), nullptr), closes(clip.melody.size(), nullptr);
  for (const auto& r : regions) {
    opens[r.first] = &r;
    closes[r.last] = &r;
  }

  const int bars = (clip.length + kTicksPerBar - 1) / kTicksPerBar;
  const auto& notes = clip.melody;
  const std::vector<ChordEvent> no_chords;
  const auto& chords = options.include_chords ? clip.chords : no_chords;

  TokenSeq seq{Token::bos()};
  std::size_t ni = 0, ci = 0;
  for (int b = 0; b < bars; ++b) {
    seq.push_back(Token::bar());
    const Tick bar_start = b * kTicksPerBar;
    const Tick bar_end = bar_start + kTicksPerBar;
    for (;;) {
      Tick t = bar_end;
      if (ni < notes.size()) t = std::min(t, notes[ni].start);
      if (ci < chords.size()) t = std::min(t, chords[ci].start);
      if (t >= bar_end) break;

      const bool has_note = ni < notes.size() && notes[ni].start == t;
      const bool has_chord = ci < chords.size() && chords[ci].start == t;
      if (has_note && opens[ni] != nullptr) {
        if (opens[ni]->type > 0) seq.push_back(Token::type(opens[ni]->type));
        seq.push_back(Token::motif_start());
      }
      seq.push_back(Token::position(t - bar_start + 1));
      if (has_chord) {
        seq.push_back(Token::chord(chords[ci].root, chords[ci].quality));
        seq.push_back(Token::duration(chords[ci].duration));
        ++ci;
      }
      if (has_note) {
        seq.push_back(Token::pitch(notes[ni].pitch));
        seq.push_back(Token::duration(notes[ni].duration));
        if (closes[ni] != nullptr) seq.push_back(Token::motif_end());
        ++ni;
      }
    }
  }
  seq.push_back(Token::eos());
  return seq;
}

Clip decode(const TokenSeq& seq) {
  GrammarState g;
  Clip clip;
  enum class Pending { kNone, kChord, kPitch } pending = Pending::kNone;
  Token pending_token;
  int next_type = 0;
  int region_type = 0;
  std::size_t region_first = 0;

  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token t = seq[i];
    if (auto reason = g.why_not(t)) {
      if (t.kind != TokenKind::kDuration && (pending == Pending::kPitch || pending == Pending::kChord)) {
        throw DecodeError("Pitch or Chord without following Duration (got " + to_string(t) + ")", i);
      }
      throw DecodeError(*reason + " (got " + to_string(t) + ")", i);
    }
    g.push(t);
    switch (t.kind) {
      case TokenKind::kType:
        next_type = t.value;
        break;
      case TokenKind::kMotifStart:
        region_type = next_type;
        next_type = 0;
        region_first = clip.melody.size();
        break;
      case TokenKind::kMotifEnd: {
        const Tick start = clip.melody[region_first].start;
        const Tick end = clip.melody.back().end();
        if (region_type == 0) {
          clip.motif_labels.push_back({start, end, static_cast<int>(clip.melody.size() - region_first)});
        } else {
          clip.variant_labels.push_back({region_type, start, end});
        }
        break;
      }
      case TokenKind::kChord:
      case TokenKind::kPitch:
        pending = t.kind == TokenKind::kChord ? Pending::kChord : Pending::kPitch;
        pending_token = t;
        break;
      case TokenKind::kDuration:
        if (pending == Pending::kChord) {
          const int root = pending_token.value / symbolic::kChordQualityCount;
          const auto q = static_cast<symbolic::ChordQuality>(pending_token.value % symbolic::kChordQualityCount);
          clip.chords.push_back({root, q, g.current_tick(), t.value});
        } else {
          clip.melody.push_back({g.current_tick(), t.value, pending_token.value, symbolic::kDefaultVelocity});
        }
        pending = Pending::kNone;
        break;
      default:
        break;
    }
  }
  if (!g.finished()) throw DecodeError("sequence ends without EOS", seq.size());

  clip.length = g.bars() * kTicksPerBar;
  if (clip.content_end() > clip.length) throw DecodeError("events extend past the final bar", seq.size() - 1);
  symbolic::sort_labels(clip);
  try {
    symbolic::validate(clip);
  } catch (const symbolic::ValidationError& e) {
    throw DecodeError(std::string("decoded clip invalid: ") + e.what(), seq.size() - 1);
  }
  return clip;
}

void check_well_formed(const TokenSeq& seq, const GrammarLimits& limits) {
  GrammarState g(limits);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (auto reason = g.why_not(seq[i])) throw DecodeError(*reason, i);
    g.push(seq[i]);
  }
  if (!g.finished()) throw DecodeError("sequence ends without EOS", seq.size());
}

std::vector<TokenSeq> split_at_bars(const TokenSeq& seq, std::size_t max_length) {
  check_well_formed(seq);
  if (seq.size() <= max_length) return {seq};

  // Indices of Bar tokens that may start a piece, plus the EOS index as sentinel.
  std::vector<std::size_t> cuts;
  bool in_region = false;
  int bars = 0;
  Tick cur = 0, note_end = 0, chord_end = 0;
  bool after_chord = false;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token t = seq[i];
    switch (t.kind) {
      case TokenKind::kBar: {
        const Tick bar_tick = bars * kTicksPerBar;
        if (!in_region && note_end <= bar_tick && chord_end <= bar_tick) cuts.push_back(i);
        ++bars;
        break;
      }
      case TokenKind::kMotifStart: in_region = true; break;
      case TokenKind::kMotifEnd: in_region = false; break;
      case TokenKind::kPosition: cur = (bars - 1) * kTicksPerBar + t.value - 1; break;
      case TokenKind::kChord: after_chord = true; break;
      case TokenKind::kPitch: after_chord = false; break;
      case TokenKind::kDuration:
        (after_chord ? chord_end : note_end) = cur + t.value;
        after_chord = false;
        break;
      case TokenKind::kEos: cuts.push_back(i); break;
      default: break;
    }
  }

  std::vector<TokenSeq> pieces;
  std::size_t from = 0;  // index into cuts
  while (from + 1 < cuts.size()) {
    std::size_t best = from;
    for (std::size_t k = from + 1; k < cuts.size(); ++k) {
      if (cuts[k] - cuts[from] + 2 <= max_length) best = k;
    }
    if (best == from) {
      throw EncodeError("cannot split sequence at a bar boundary within " + std::to_string(max_length) + " tokens");
    }
    TokenSeq piece{Token::bos()};
    piece.insert(piece.end(), seq.begin() + static_cast<std::ptrdiff_t>(cuts[from]),
                 seq.begin() + static_cast<std::ptrdiff_t>(cuts[best]));
    piece.push_back(Token::eos());
    pieces.push_back(std::move(piece));
    from = best;
  }
  return pieces;
}

TokenSeq strip_chords(const TokenSeq& seq) {
  TokenSeq out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token t = seq[i];
    if (t.kind == TokenKind::kPosition && i + 1 < seq.size() && seq[i + 1].kind == TokenKind::kChord) {
      const bool note_follows = i + 3 < seq.size() && seq[i + 3].kind == TokenKind::kPitch;
      if (note_follows) out.push_back(t);
      i += 2;  // Chord and its Duration
      continue;
    }
    out.push_back(t);
  }
  return out;
}

TokenSeq close_sequence(const TokenSeq& prefix) {
  TokenSeq out = prefix;
  if (out.empty() || out.front().kind != TokenKind::kBos) out.insert(out.begin(), Token::bos());
  if (out.back().kind == TokenKind::kEos) out.pop_back();

  for (;;) {
    GrammarState g = replay(out);
    if (g.allows(Token::eos())) break;
    const TokenKind last = out.back().kind;
    if (!g.at_boundary() && last != TokenKind::kType && last != TokenKind::kMotifStart) {
      out.pop_back();
      continue;
    }
    if (last == TokenKind::kType || last == TokenKind::kMotifStart) {
      out.pop_back();
      continue;
    }
    if (g.in_region()) {
      if (g.allows(Token::motif_end())) {
        out.push_back(Token::motif_end());
        continue;
      }
      // Unlabel the open region: drop its MotifStart and Type.
      for (std::size_t i = out.size(); i-- > 0;) {
        if (out[i].kind == TokenKind::kMotifStart) {
          const bool typed = i > 0 && out[i - 1].kind == TokenKind::kType;
          out.erase(out.begin() + static_cast<std::ptrdiff_t>(typed ? i - 1 : i),
                    out.begin() + static_cast<std::ptrdiff_t>(i + 1));
          break;
        }
      }
      continue;
    }
    out.pop_back();
  }
  GrammarState g = replay(out);
  while (g.content_end() > g.bars() * kTicksPerBar) {
    out.push_back(Token::bar());
    g.push(Token::bar());
  }
  out.push_back(Token::eos());
  return out;
}

std::vector<TokenRegion> find_regions(const TokenSeq& seq) {
  std::vector<TokenRegion> regions;
  std::optional<TokenRegion> open;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token t = seq[i];
    if (t.kind == TokenKind::kType) {
      if (open) throw DecodeError("Type inside an open region", i);
      if (i + 1 >= seq.size() || seq[i + 1].kind != TokenKind::kMotifStart) {
        throw DecodeError("Type not followed by MotifStart", i);
      }
    } else if (t.kind == TokenKind::kMotifStart) {
      if (open) throw DecodeError("nested MotifStart", i);
      const bool typed = i > 0 && seq[i - 1].kind == TokenKind::kType;
      open = TokenRegion{typed ? seq[i - 1].value : 0, typed ? i - 1 : i, i, i};
    } else if (t.kind == TokenKind::kMotifEnd) {
      if (!open) throw DecodeError("MotifEnd without MotifStart", i);
      open->end = i;
      regions.push_back(*open);
      open.reset();
    }
  }
  if (open) throw DecodeError("MotifStart never closed", seq.size());
  return regions;
}

}  // namespace melotrans::remi
