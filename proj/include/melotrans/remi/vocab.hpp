/**
 * @file vocab.hpp
 * @brief REMI token kinds and the fixed vocabulary layout.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "melotrans/symbolic/clip.hpp"

namespace melotrans::remi {

enum class TokenKind : std::uint8_t {
  kBos,
  kEos,
  kBar,
  kMotifStart,
  kMotifEnd,
  kType,      ///< value: variant type 1..5
  kPosition,  ///< value: 1..16 within the bar
  kPitch,     ///< value: MIDI pitch 0..127
  kDuration,  ///< value: 1..32 ticks
  kChord,     ///< value: root * kChordQualityCount + quality
};

inline constexpr int kPositionsPerBar = symbolic::kTicksPerBar;
inline constexpr int kMaxDuration = 2 * symbolic::kTicksPerBar;
inline constexpr std::size_t kDefaultMaxLength = 1024;

struct Token {
  TokenKind kind = TokenKind::kBos;
  int value = 0;

  bool operator==(const Token&) const = default;

  static Token bos() { return {TokenKind::kBos, 0}; }
  static Token eos() { return {TokenKind::kEos, 0}; }
  static Token bar() { return {TokenKind::kBar, 0}; }
  static Token motif_start() { return {TokenKind::kMotifStart, 0}; }
  static Token motif_end() { return {TokenKind::kMotifEnd, 0}; }
  static Token type(int j) { return {TokenKind::kType, j}; }
  static Token position(int p) { return {TokenKind::kPosition, p}; }
  static Token pitch(int p) { return {TokenKind::kPitch, p}; }
  static Token duration(int d) { return {TokenKind::kDuration, d}; }
  static Token chord(int root, symbolic::ChordQuality q) {
    return {TokenKind::kChord, root * symbolic::kChordQualityCount + static_cast<int>(q)};
  }
};

using TokenSeq = std::vector<Token>;

/// Maps tokens to contiguous vocabulary indices and back.
class Vocabulary {
 public:
  static constexpr int kVersion = 1;

  static const Vocabulary& instance();

  int size() const { return static_cast<int>(tokens_.size()); }
  int index_of(Token t) const;  ///< throws std::out_of_range for invalid tokens
  Token token_at(int index) const;

  std::vector<int> to_indices(const TokenSeq& seq) const;
  TokenSeq from_indices(const std::vector<int>& ids) const;

  /// Versioned text form: header line, then "index<TAB>kind<TAB>argument" rows.
  void save(std::ostream& out) const;
  /// Throws std::runtime_error when the file disagrees with this build's layout.
  static void verify(std::istream& in);

 private:
  Vocabulary();
  std::vector<Token> tokens_;
};

std::string to_string(Token t);
std::string to_string(const TokenSeq& seq);

}  // namespace melotrans::remi
