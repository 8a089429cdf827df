/**
 * @file codec.hpp
 * @brief Clip <-> REMI token sequence conversion with label tokens.
 *
 * A label region opens with [Type(j)] MotifStart right before the Position
 * of its first melody note and closes with MotifEnd right after the Duration
 * of its last melody note. Decoding therefore recovers regions tightened to
 * their notes; decode(encode(c)) == c holds for clips whose labels are
 * already tight, whose velocities are kDefaultVelocity and whose length is a
 * whole number of bars.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "melotrans/remi/grammar.hpp"
#include "melotrans/remi/vocab.hpp"
#include "melotrans/symbolic/clip.hpp"

namespace melotrans::remi {

class EncodeError : public std::runtime_error {
 public:
  explicit EncodeError(const std::string& what) : std::runtime_error(what) {}
};

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t index)
      : std::runtime_error("token " + std::to_string(index) + ": " + what), index_(index) {}

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct EncodeOptions {
  bool include_chords = true;
};

TokenSeq encode(const symbolic::Clip& clip, const EncodeOptions& options = {});

symbolic::Clip decode(const TokenSeq& seq);

/// Throws DecodeError at the first offending token.
void check_well_formed(const TokenSeq& seq, const GrammarLimits& limits = {});

/// Splits at bar boundaries so every piece (with its own BOS/EOS) fits
/// max_length. Boundaries inside a label region or under a sounding note
/// are never used; throws EncodeError when no valid split exists.
std::vector<TokenSeq> split_at_bars(const TokenSeq& seq, std::size_t max_length = kDefaultMaxLength);

/// Drops chord tokens (Chord and its Duration).
TokenSeq strip_chords(const TokenSeq& seq);

/// Turns a truncated prefix into a decodable sequence: incomplete trailing
/// groups are dropped, an open region is closed (or unlabelled when it
/// cannot be closed validly) and EOS is appended.
TokenSeq close_sequence(const TokenSeq& prefix);

/// A label region located inside a token sequence.
struct TokenRegion {
  int type = 0;              ///< 0 for a motif region, 1..5 for variants
  std::size_t type_index = 0;  ///< index of Type(j) (equals begin for motif regions)
  std::size_t begin = 0;     ///< index of MotifStart
  std::size_t end = 0;       ///< index of MotifEnd (inclusive)
};

/// Regions of a well-formed sequence in order of appearance.
std::vector<TokenRegion> find_regions(const TokenSeq& seq);

}  // namespace melotrans::remi
