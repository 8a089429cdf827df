/**
 * @file dataset.hpp
 * @brief Phrase segmentation, tokenization, splits and training examples.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "melotrans/mgm/train.hpp"
#include "melotrans/symbolic/clip.hpp"

namespace melotrans::pipeline {

enum class Split : std::uint8_t { kTrain, kValid, kTest };

const char* split_name(Split s);

struct SplitRatios {
  double train = 8.5;
  double valid = 1.0;
  double test = 0.5;
};

/// Parses "a,b,c"; every part must be positive.
SplitRatios parse_ratios(const std::string& text);

/// Seeded shuffle, then the first round(n * train) items go to train, the
/// next round(n * valid) to valid and the rest to test.
std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

/// Cuts a clip into consecutive phrases of `bars` bars. Labels entirely
/// inside a phrase are kept (shifted); labels crossing a cut are dropped.
/// Trailing phrases without any note are skipped.
std::vector<symbolic::Clip> segment_clip(const symbolic::Clip& clip, int bars);

struct Segment {
  std::string source;  ///< file the phrase came from
  int index = 0;       ///< phrase number within the file
  Split split = Split::kTrain;
  remi::TokenSeq tokens;
};

struct DatasetOptions {
  int bars = 16;
  bool chords = false;  ///< keep chord tokens in the stored sequences
  std::size_t max_len = remi::kDefaultMaxLength;
  SplitRatios ratios;
  std::uint64_t seed = 1;
};

/// Segments and tokenizes every clip, splitting at the clip level so all
/// phrases of one file land in the same split. Sequences longer than
/// max_len are cut at bar boundaries.
std::vector<Segment> build_segments(const std::vector<std::pair<std::string, symbolic::Clip>>& clips,
                                    const DatasetOptions& options);

nlohmann::json segment_to_json(const Segment& s);
Segment segment_from_json(const nlohmann::json& j);

struct BranchPair {
  int type = 1;
  remi::TokenSeq motif;    ///< MotifStart ... MotifEnd
  remi::TokenSeq variant;  ///< MotifStart ... MotifEnd
};

struct PairStats {
  std::size_t kept = 0;
  std::size_t too_long = 0;  ///< variant region reaching 2 * l_m tokens
};

/// Pairs each variant region with the nearest preceding motif region.
/// Chord tokens are removed first.
std::vector<BranchPair> branch_pairs(const remi::TokenSeq& tokens, PairStats* stats = nullptr);

/// Phrase-model example: the encoder reads the first motif region and the
/// first region of each type (the motif stands in for a missing type); the
/// decoder target is the chord-free phrase. Empty when there is no motif.
std::optional<mgm::Example> phrase_example(const remi::TokenSeq& tokens);

}  // namespace melotrans::pipeline
