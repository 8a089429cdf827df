/**
 * @file dataset.cpp
 */

#include "melotrans/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "melotrans/remi/codec.hpp"
#include "melotrans/ttmm/rng.hpp"

namespace melotrans::pipeline {

using remi::Token;
using remi::TokenSeq;
using symbolic::Clip;
using symbolic::Tick;

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "?";
}

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("split ratios must be numbers, got '" + item + "'");
    }
  }
  if (parts.size() != 3) throw std::invalid_argument("split ratios need three values train,valid,test");
  for (double p : parts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("split ratios must be positive");
  }
  return {parts[0], parts[1], parts[2]};
}

std::vector<Split> assign_splits(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  const double total = ratios.train + ratios.valid + ratios.test;
  if (!(ratios.train > 0 && ratios.valid > 0 && ratios.test > 0)) throw std::invalid_argument("split ratios must be positive");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  ttmm::Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train / total));
  const auto n_valid = std::min(n - std::min(n, n_train),
                                static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.valid / total)));
  std::vector<Split> out(n, Split::kTest);
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = k < n_train ? Split::kTrain : (k < n_train + n_valid ? Split::kValid : Split::kTest);
  }
  return out;
}

std::vector<Clip> segment_clip(const Clip& clip, int bars) {
  if (bars < 1) throw std::invalid_argument("phrase length must be at least one bar");
  const Tick span = bars * symbolic::kTicksPerBar;
  std::vector<Clip> out;
  for (Tick start = 0; start < clip.length; start += span) {
    const Tick end = start + span;
    Clip seg;
    seg.length = span;
    for (const auto& n : clip.melody) {
      if (n.start >= start && n.start < end) {
        auto copy = n;
        copy.start -= start;
        copy.duration = std::min(copy.duration, end - n.start);
        seg.melody.push_back(copy);
      }
    }
    if (seg.melody.empty()) continue;
    for (const auto& c : clip.chords) {
      if (c.start >= start && c.start < end) {
        auto copy = c;
        copy.start -= start;
        copy.duration = std::min(copy.duration, end - c.start);
        seg.chords.push_back(copy);
      }
    }
    for (const auto& m : clip.motif_labels) {
      if (m.start >= start && m.end <= end) seg.motif_labels.push_back({m.start - start, m.end - start, m.note_count});
    }
    for (const auto& v : clip.variant_labels) {
      if (v.start >= start && v.end <= end) seg.variant_labels.push_back({v.type, v.start - start, v.end - start});
    }
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Segment> build_segments(const std::vector<std::pair<std::string, Clip>>& clips,
                                    const DatasetOptions& options) {
  const auto splits = assign_splits(clips.size(), options.ratios, options.seed);
  std::vector<Segment> out;
  remi::EncodeOptions enc;
  enc.include_chords = options.chords;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    int index = 0;
    for (const auto& phrase : segment_clip(clips[i].second, options.bars)) {
      for (auto& piece : remi::split_at_bars(remi::encode(phrase, enc), options.max_len)) {
        out.push_back({clips[i].first, index++, splits[i], std::move(piece)});
      }
    }
  }
  return out;
}

nlohmann::json segment_to_json(const Segment& s) {
  return {{"source", s.source},
          {"segment", s.index},
          {"split", split_name(s.split)},
          {"tokens", remi::Vocabulary::instance().to_indices(s.tokens)}};
}

Segment segment_from_json(const nlohmann::json& j) {
  Segment s;
  s.source = j.at("source").get<std::string>();
  s.index = j.at("segment").get<int>();
  const auto split = j.at("split").get<std::string>();
  if (split == "train") {
    s.split = Split::kTrain;
  } else if (split == "valid") {
    s.split = Split::kValid;
  } else if (split == "test") {
    s.split = Split::kTest;
  } else {
    throw std::invalid_argument("unknown split '" + split + "'");
  }
  s.tokens = remi::Vocabulary::instance().from_indices(j.at("tokens").get<std::vector<int>>());
  return s;
}

namespace {

TokenSeq slice(const TokenSeq& seq, const remi::TokenRegion& r) {
  return TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(r.begin), seq.begin() + static_cast<std::ptrdiff_t>(r.end) + 1);
}

}  // namespace

std::vector<BranchPair> branch_pairs(const TokenSeq& tokens, PairStats* stats) {
  const TokenSeq seq = remi::strip_chords(tokens);
  std::vector<BranchPair> out;
  std::optional<TokenSeq> motif;
  for (const auto& r : remi::find_regions(seq)) {
    if (r.type == 0) {
      motif = slice(seq, r);
      continue;
    }
    if (!motif) continue;
    TokenSeq variant = slice(seq, r);
    if (variant.size() >= 2 * motif->size()) {
      if (stats != nullptr) ++stats->too_long;
      continue;
    }
    if (stats != nullptr) ++stats->kept;
    out.push_back({r.type, *motif, std::move(variant)});
  }
  return out;
}

std::optional<mgm::Example> phrase_example(const TokenSeq& tokens) {
  const TokenSeq seq = remi::strip_chords(tokens);
  const auto regions = remi::find_regions(seq);
  const auto motif_it = std::find_if(regions.begin(), regions.end(), [](const auto& r) { return r.type == 0; });
  if (motif_it == regions.end()) return std::nullopt;
  const TokenSeq motif = slice(seq, *motif_it);
  std::array<TokenSeq, 5> variants;
  for (int j = 1; j <= 5; ++j) {
    const auto it = std::find_if(regions.begin(), regions.end(), [j](const auto& r) { return r.type == j; });
    variants[static_cast<std::size_t>(j - 1)] = it == regions.end() ? motif : slice(seq, *it);
  }
  const mgm::EncoderInput input = mgm::concat_segments(motif, variants);
  return mgm::Example{input.tokens, seq, input.layout};
}

}  // namespace melotrans::pipeline
