/**
 * @file vocab.cpp
 * @brief Vocabulary layout and its text serialisation.
 */

#include "melotrans/remi/vocab.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace melotrans::remi {

namespace {

constexpr int kTypeBase = 5;
constexpr int kPositionBase = kTypeBase + symbolic::kVariantTypeCount;
constexpr int kPitchBase = kPositionBase + kPositionsPerBar;
constexpr int kDurationBase = kPitchBase + 128;
constexpr int kChordBase = kDurationBase + kMaxDuration;
constexpr int kChordCount = 12 * symbolic::kChordQualityCount;

const char* kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::kBos: return "BOS";
    case TokenKind::kEos: return "EOS";
    case TokenKind::kBar: return "Bar";
    case TokenKind::kMotifStart: return "MotifStart";
    case TokenKind::kMotifEnd: return "MotifEnd";
    case TokenKind::kType: return "Type";
    case TokenKind::kPosition: return "Position";
    case TokenKind::kPitch: return "Pitch";
    case TokenKind::kDuration: return "Duration";
    case TokenKind::kChord: return "Chord";
  }
  return "?";
}

const char* kRootNames[12] = {"C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

std::string argument(Token t) {
  switch (t.kind) {
    case TokenKind::kType:
    case TokenKind::kPosition:
    case TokenKind::kPitch:
    case TokenKind::kDuration:
      return std::to_string(t.value);
    case TokenKind::kChord: {
      const int root = t.value / symbolic::kChordQualityCount;
      const auto q = static_cast<symbolic::ChordQuality>(t.value % symbolic::kChordQualityCount);
      return std::string(kRootNames[root]) + ":" + symbolic::chord_quality_name(q);
    }
    default:
      return "-";
  }
}

}  // namespace

Vocabulary::Vocabulary() {
  tokens_ = {Token::bos(), Token::eos(), Token::bar(), Token::motif_start(), Token::motif_end()};
  for (int j = 1; j <= symbolic::kVariantTypeCount; ++j) tokens_.push_back(Token::type(j));
  for (int p = 1; p <= kPositionsPerBar; ++p) tokens_.push_back(Token::position(p));
  for (int p = 0; p < 128; ++p) tokens_.push_back(Token::pitch(p));
  for (int d = 1; d <= kMaxDuration; ++d) tokens_.push_back(Token::duration(d));
  for (int c = 0; c < kChordCount; ++c) tokens_.push_back({TokenKind::kChord, c});
}

const Vocabulary& Vocabulary::instance() {
  static const Vocabulary vocab;
  return vocab;
}

int Vocabulary::index_of(Token t) const {
  auto check = [&](bool ok) {
    if (!ok) throw std::out_of_range("token outside vocabulary: " + to_string(t));
  };
  switch (t.kind) {
    case TokenKind::kBos: return 0;
    case TokenKind::kEos: return 1;
    case TokenKind::kBar: return 2;
    case TokenKind::kMotifStart: return 3;
    case TokenKind::kMotifEnd: return 4;
    case TokenKind::kType:
      check(t.value >= 1 && t.value <= symbolic::kVariantTypeCount);
      return kTypeBase + t.value - 1;
    case TokenKind::kPosition:
      check(t.value >= 1 && t.value <= kPositionsPerBar);
      return kPositionBase + t.value - 1;
    case TokenKind::kPitch:
      check(t.value >= 0 && t.value < 128);
      return kPitchBase + t.value;
    case TokenKind::kDuration:
      check(t.value >= 1 && t.value <= kMaxDuration);
      return kDurationBase + t.value - 1;
    case TokenKind::kChord:
      check(t.value >= 0 && t.value < kChordCount);
      return kChordBase + t.value;
  }
  throw std::out_of_range("unknown token kind");
}

Token Vocabulary::token_at(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("vocabulary index " + std::to_string(index));
  return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::to_indices(const TokenSeq& seq) const {
  std::vector<int> ids;
  ids.reserve(seq.size());
  for (const auto& t : seq) ids.push_back(index_of(t));
  return ids;
}

TokenSeq Vocabulary::from_indices(const std::vector<int>& ids) const {
  TokenSeq seq;
  seq.reserve(ids.size());
  for (int id : ids) seq.push_back(token_at(id));
  return seq;
}

void Vocabulary::save(std::ostream& out) const {
  out << "# melotrans-vocab v" << kVersion << " size " << size() << "\n";
  for (int i = 0; i < size(); ++i) {
    const Token t = tokens_[static_cast<std::size_t>(i)];
    out << i << '\t' << kind_name(t.kind) << '\t' << argument(t) << '\n';
  }
}

void Vocabulary::verify(std::istream& in) {
  const auto& vocab = instance();
  std::string header;
  std::getline(in, header);
  std::ostringstream expected;
  expected << "# melotrans-vocab v" << kVersion << " size " << vocab.size();
  if (header != expected.str()) {
    throw std::runtime_error("vocabulary header mismatch: got '" + header + "', expected '" + expected.str() + "'");
  }
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    int index = -1;
    std::string kind, arg;
    fields >> index >> kind >> arg;
    if (index != row || index >= vocab.size()) {
      throw std::runtime_error("vocabulary row " + std::to_string(row) + " has index " + std::to_string(index));
    }
    const Token t = vocab.token_at(index);
    if (kind != kind_name(t.kind) || arg != argument(t)) {
      throw std::runtime_error("vocabulary row " + std::to_string(row) + " disagrees with built-in layout");
    }
    ++row;
  }
  if (row != vocab.size()) throw std::runtime_error("vocabulary file has " + std::to_string(row) + " rows");
}

std::string to_string(Token t) {
  const std::string arg = argument(t);
  return arg == "-" ? std::string(kind_name(t.kind)) : std::string(kind_name(t.kind)) + "(" + arg + ")";
}

std::string to_string(const TokenSeq& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += to_string(seq[i]);
  }
  return out;
}

}  // namespace melotrans::remi
