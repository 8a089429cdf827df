/**
 * @file masks.cpp
 */

#include "melotrans/mgm/masks.hpp"

#include <cmath>
#include <string>

namespace melotrans::mgm {

using remi::TokenKind;

std::vector<RegionSpan> scan_regions(const TokenSeq& seq, bool allow_open) {
  std::vector<RegionSpan> out;
  bool open = false;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Token t = seq[i];
    if (t.kind == TokenKind::kMotifStart) {
      if (open) throw MaskError("nested MotifStart at token " + std::to_string(i));
      RegionSpan r;
      r.begin = i;
      if (i > 0 && seq[i - 1].kind == TokenKind::kType) r.type = seq[i - 1].value;
      out.push_back(r);
      open = true;
    } else if (t.kind == TokenKind::kMotifEnd) {
      if (!open) throw MaskError("MotifEnd without MotifStart at token " + std::to_string(i));
      out.back().end = i + 1;
      open = false;
    }
  }
  if (open) {
    if (!allow_open) throw MaskError("region opened at token " + std::to_string(out.back().begin) + " is never closed");
    out.back().end = seq.size();
    out.back().open = true;
  }
  return out;
}

std::vector<std::uint8_t> build_region_mask(const TokenSeq& seq, bool allow_open) {
  std::vector<std::uint8_t> mask(seq.size(), 0);
  for (const auto& r : scan_regions(seq, allow_open)) {
    for (std::size_t i = r.begin; i < r.end; ++i) mask[i] = 1;
  }
  return mask;
}

std::vector<int> build_mv_mask(const TokenSeq& seq, int l_m) {
  if (l_m < 1) throw MaskError("motif token length must be positive");
  std::vector<int> mask(seq.size(), 0);
  std::array<int, kSegments> seen{};
  const int width = 2 * l_m;
  for (const auto& r : scan_regions(seq)) {
    if (r.end - r.begin >= static_cast<std::size_t>(width)) {
      throw MaskError("region of type " + std::to_string(r.type) + " at tokens " + std::to_string(r.begin) + ".." +
                      std::to_string(r.end - 1) + " holds " + std::to_string(r.end - r.begin) +
                      " tokens; the limit is " + std::to_string(width - 1));
    }
    const int slot = seen[static_cast<std::size_t>(r.type)]++ * kSegments + r.type;
    for (std::size_t i = r.begin; i < r.end; ++i) mask[i] = slot * width + static_cast<int>(i - r.begin) + 1;
  }
  return mask;
}

std::pair<int, int> decode_mv(int m, int l_m) {
  if (m <= 0) throw MaskError("mask value 0 lies outside every region");
  const int width = 2 * l_m;
  return {((m - 1) / width) % kSegments, (m - 1) % width};
}

EncoderInput concat_segments(const TokenSeq& motif, const std::array<TokenSeq, 5>& variants) {
  auto check = [](const TokenSeq& region, const std::string& what) {
    if (region.size() < 2 || region.front() != Token::motif_start() || region.back() != Token::motif_end()) {
      throw MaskError(what + " must run from MotifStart to MotifEnd");
    }
  };
  check(motif, "motif");
  EncoderInput in;
  in.l_m = static_cast<int>(motif.size());
  in.tokens.push_back(Token::bos());
  in.layout.spans[0] = {in.tokens.size(), in.tokens.size() + motif.size()};
  in.tokens.insert(in.tokens.end(), motif.begin(), motif.end());
  for (int j = 1; j <= 5; ++j) {
    const auto& v = variants[static_cast<std::size_t>(j - 1)];
    check(v, "variant " + std::to_string(j));
    in.tokens.push_back(Token::type(j));
    in.layout.spans[static_cast<std::size_t>(j)] = {in.tokens.size(), in.tokens.size() + v.size()};
    in.tokens.insert(in.tokens.end(), v.begin(), v.end());
  }
  in.tokens.push_back(Token::eos());
  return in;
}

double pe_value(std::size_t position, int column, int d) {
  const double rate = std::pow(10000.0, -static_cast<double>(column - column % 2) / d);
  const double angle = static_cast<double>(position) * rate;
  return column % 2 == 0 ? std::sin(angle) : std::cos(angle);
}

Matrix positional_encoding(std::size_t rows, int d) {
  Matrix pe(static_cast<Eigen::Index>(rows), d);
  for (std::size_t i = 0; i < rows; ++i) {
    for (int c = 0; c < d; ++c) pe(static_cast<Eigen::Index>(i), c) = pe_value(i, c, d);
  }
  return pe;
}

AlignedPositions mvape_positions(const TokenSeq& decoder, const EncoderLayout& layout, bool allow_open) {
  AlignedPositions out;
  out.positions.resize(decoder.size());
  for (std::size_t i = 0; i < decoder.size(); ++i) out.positions[i] = i;
  for (const auto& r : scan_regions(decoder, allow_open)) {
    const Span& span = layout.spans[static_cast<std::size_t>(r.type)];
    for (std::size_t i = r.begin; i < r.end; ++i) {
      const std::size_t rho = i - r.begin;
      if (rho < span.size()) {
        out.positions[i] = span.begin + rho;
      } else {
        out.fallback.push_back(i);
      }
    }
  }
  return out;
}

Matrix mvape(const AlignedPositions& aligned, int d) {
  Matrix pe(static_cast<Eigen::Index>(aligned.positions.size()), d);
  for (std::size_t i = 0; i < aligned.positions.size(); ++i) {
    for (int c = 0; c < d; ++c) pe(static_cast<Eigen::Index>(i), c) = pe_value(aligned.positions[i], c, d);
  }
  return pe;
}

}  // namespace melotrans::mgm
