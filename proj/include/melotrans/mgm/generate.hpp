/**
 * @file generate.hpp
 * @brief Grammar-constrained decoding for branches and the phrase model.
 *
 * Every step masks out tokens the REMI grammar would reject, so outputs are
 * always decodable. Temperature 0 means greedy (ties go to the lower index).
 */

#pragma once

#include <array>
#include <cstdint>

#include "melotrans/mgm/model.hpp"
#include "melotrans/ttmm/rng.hpp"

namespace melotrans::mgm {

struct SamplingOptions {
  double temperature = 0.0;
  std::uint64_t seed = 1;
};

/// Picks a vocabulary index from one row of logits among allowed entries;
/// returns -1 when nothing is allowed.
int pick_token(const Eigen::RowVectorXd& logits, const std::vector<bool>& allowed, double temperature, ttmm::Rng& rng);

struct VariantResult {
  TokenSeq region;  ///< MotifStart ... MotifEnd
  bool truncated = false;
};

/// Decodes one variant region of the given type from a motif region. The
/// region is capped at 2 * l_m - 1 tokens (l_m = motif region length); when
/// the cap is hit the tail is cut back to the last complete note and closed.
VariantResult generate_variant(const EncoderDecoder& branch, const TokenSeq& motif_region, int type,
                               const SamplingOptions& sampling);

struct VariantSet {
  EncoderInput input;
  std::array<bool, 5> truncated{};
};

/// Runs all five branches and concatenates motif and variants.
VariantSet generate_variants(const std::array<const EncoderDecoder*, 5>& branches, const TokenSeq& motif_region,
                             const SamplingOptions& sampling);

struct PhraseOptions {
  int bars = 16;
  SamplingOptions sampling;
};

struct PhraseResult {
  TokenSeq tokens;
  std::size_t mvape_fallbacks = 0;  ///< decoder rows that ran past their encoder span
  bool hit_max_len = false;
  bool dead_end = false;
};

PhraseResult generate_phrase(const EncoderDecoder& model, const EncoderInput& input, const PhraseOptions& options);

/// Tokens of the first motif region (MotifStart ... MotifEnd) of a clip,
/// chords left out. Throws std::invalid_argument if the clip has no motif.
TokenSeq motif_region_tokens(const symbolic::Clip& clip);

}  // namespace melotrans::mgm
