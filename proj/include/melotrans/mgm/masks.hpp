/**
 * @file masks.hpp
 * @brief Region mask, motif/variant mask, encoder layout and aligned positions.
 *
 * A region runs from MotifStart through MotifEnd (both included); a Type
 * token in front of it is outside. Inside a region of type j (0 = motif) the
 * k-th token gets mask value (n * 6 + j) * 2 * l_m + k + 1, where n counts
 * earlier regions of the same type, so values never repeat and 0 always
 * means "outside".
 */

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "melotrans/mgm/tensor.hpp"
#include "melotrans/remi/vocab.hpp"

namespace melotrans::mgm {

using remi::Token;
using remi::TokenSeq;

inline constexpr int kSegments = 6;  ///< motif plus five variant types

class MaskError : public std::invalid_argument {
 public:
  explicit MaskError(const std::string& what) : std::invalid_argument(what) {}
};

struct RegionSpan {
  int type = 0;
  std::size_t begin = 0;  ///< MotifStart index
  std::size_t end = 0;    ///< one past MotifEnd, or the sequence size if still open
  bool open = false;
};

/// Regions in order. With allow_open a trailing unclosed region is reported
/// (generation prefixes); otherwise it is an error, as is any nesting.
std::vector<RegionSpan> scan_regions(const TokenSeq& seq, bool allow_open = false);

std::vector<std::uint8_t> build_region_mask(const TokenSeq& seq, bool allow_open = false);

/// Throws MaskError naming the region when it holds 2 * l_m tokens or more.
std::vector<int> build_mv_mask(const TokenSeq& seq, int l_m);

/// (type, k) recovered from a nonzero mask value.
std::pair<int, int> decode_mv(int m, int l_m);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  ///< exclusive
  std::size_t size() const { return end - begin; }
};

struct EncoderLayout {
  std::array<Span, kSegments> spans{};  ///< index 0 is the motif, j the type-j variant
};

/// Concatenated encoder input V with its span bookkeeping.
struct EncoderInput {
  TokenSeq tokens;
  EncoderLayout layout;
  int l_m = 0;  ///< token length of the motif region
};

/// Region token lists (MotifStart ... MotifEnd) to
/// BOS, motif, Type(1) v1, ..., Type(5) v5, EOS.
EncoderInput concat_segments(const TokenSeq& motif, const std::array<TokenSeq, 5>& variants);

/// Sinusoidal encoding value at (position, column) for width d.
double pe_value(std::size_t position, int column, int d);
Matrix positional_encoding(std::size_t rows, int d);

struct AlignedPositions {
  std::vector<std::size_t> positions;  ///< encoder-aligned position per decoder token
  std::vector<std::size_t> fallback;   ///< rows that ran past their encoder span
};

/// Decoder token i in a type-j region starting at t_j takes the position
/// spans[j].begin + (i - t_j); outside regions, or past the span, it keeps i.
AlignedPositions mvape_positions(const TokenSeq& decoder, const EncoderLayout& layout, bool allow_open = true);

/// Rows of positional_encoding evaluated at the aligned positions.
Matrix mvape(const AlignedPositions& aligned, int d);

}  // namespace melotrans::mgm
