/**
 * @file generate.cpp
 */

#include "melotrans/mgm/generate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "melotrans/remi/codec.hpp"

namespace melotrans::mgm {
namespace {

using remi::GrammarState;
using remi::TokenKind;

const remi::Vocabulary& vocab() { return remi::Vocabulary::instance(); }

Eigen::RowVectorXd last_row(const EncoderDecoder& model, const Var& enc, const TokenSeq& prefix,
                            const EncoderLayout* layout, std::vector<std::size_t>* fallback) {
  const Var logits = model.decode(enc, prefix, layout, fallback);
  return logits->value.row(logits->value.rows() - 1);
}

// Grammar state positioned where a region of the given type may open.
GrammarState region_grammar(int type) {
  GrammarState g({0, false});
  g.push(Token::bos());
  g.push(Token::bar());
  if (type > 0) g.push(Token::type(type));
  return g;
}

// Longest prefix of `region` (which starts with MotifStart) after which the
// region can be closed, closed with MotifEnd; empty if there is none.
TokenSeq close_region(const TokenSeq& region, int type, std::size_t max_tokens) {
  for (std::size_t cut = std::min(region.size(), max_tokens - 1); cut >= 2; --cut) {
    GrammarState g = region_grammar(type);
    for (std::size_t i = 0; i < cut; ++i) g.push(region[i]);
    if (g.allows(Token::motif_end())) {
      TokenSeq out(region.begin(), region.begin() + static_cast<std::ptrdiff_t>(cut));
      out.push_back(Token::motif_end());
      return out;
    }
  }
  return {};
}

// Follows the shortest obvious continuation (close the region, finish the
// group, earliest free position, next bar) and reports whether EOS becomes
// reachable. Used to keep phrase decoding out of dead ends.
bool can_finish(GrammarState g) {
  const std::size_t cap = 64 * static_cast<std::size_t>(remi::kPositionsPerBar) * 4;
  for (std::size_t step = 0; step < cap; ++step) {
    if (g.allows(Token::eos())) return true;
    Token next = Token::eos();
    bool found = true;
    if (g.allows(Token::motif_end())) {
      next = Token::motif_end();
    } else if (g.allows(Token::duration(1))) {
      next = Token::duration(1);
    } else if (g.allows(Token::pitch(60))) {
      next = Token::pitch(60);
    } else if (!g.at_boundary() && g.allows(Token::motif_start())) {
      next = Token::motif_start();
    } else {
      found = false;
      if (!g.in_region() && g.allows(Token::bar())) {
        next = Token::bar();
        found = true;
      }
      for (int p = 1; !found && p <= remi::kPositionsPerBar; ++p) {
        if (g.allows(Token::position(p))) {
          next = Token::position(p);
          found = true;
        }
      }
      if (!found && g.allows(Token::bar())) {
        next = Token::bar();
        found = true;
      }
    }
    if (!found) return false;
    g.push(next);
  }
  return false;
}

}  // namespace

int pick_token(const Eigen::RowVectorXd& logits, const std::vector<bool>& allowed, double temperature, ttmm::Rng& rng) {
  int best = -1;
  for (int i = 0; i < logits.size(); ++i) {
    if (allowed[static_cast<std::size_t>(i)] && (best < 0 || logits(i) > logits(best))) best = i;
  }
  if (best < 0 || temperature <= 0.0) return best;
  std::vector<double> weights(allowed.size(), 0.0);
  double total = 0.0;
  for (int i = 0; i < logits.size(); ++i) {
    if (!allowed[static_cast<std::size_t>(i)]) continue;
    weights[static_cast<std::size_t>(i)] = std::exp((logits(i) - logits(best)) / temperature);
    total += weights[static_cast<std::size_t>(i)];
  }
  double u = rng.uniform01() * total;
  for (int i = 0; i < logits.size(); ++i) {
    if (!allowed[static_cast<std::size_t>(i)]) continue;
    u -= weights[static_cast<std::size_t>(i)];
    if (u < 0.0) return i;
  }
  return best;
}

VariantResult generate_variant(const EncoderDecoder& branch, const TokenSeq& motif_region, int type,
                               const SamplingOptions& sampling) {
  if (type < 1 || type > 5) throw std::invalid_argument("variant type must be 1..5");
  if (motif_region.size() < 2 || motif_region.front() != Token::motif_start() ||
      motif_region.back() != Token::motif_end()) {
    throw std::invalid_argument("motif region must run from MotifStart to MotifEnd");
  }
  NoGradGuard no_grad;
  ttmm::Rng rng(sampling.seed + static_cast<std::uint64_t>(type));
  const std::size_t limit = 2 * motif_region.size() - 1;
  const Var enc = branch.encode(motif_region);
  GrammarState g = region_grammar(type);
  const int bars_at_start = g.bars();
  TokenSeq prefix{Token::bos()};
  VariantResult out;
  std::vector<bool> allowed(static_cast<std::size_t>(vocab().size()));

  while (out.region.size() < limit) {
    for (int i = 0; i < vocab().size(); ++i) {
      const Token t = vocab().token_at(i);
      bool ok;
      if (out.region.empty()) {
        ok = t.kind == TokenKind::kMotifStart;
      } else if (t.kind == TokenKind::kEos || t.kind == TokenKind::kType || t.kind == TokenKind::kMotifStart) {
        ok = false;
      } else if (t.kind == TokenKind::kBar && g.bars() - bars_at_start >= 1) {
        ok = false;  // regions span at most two bars
      } else if (out.region.size() + 1 == limit) {
        ok = t.kind == TokenKind::kMotifEnd && g.allows(t);
      } else {
        ok = g.allows(t);
      }
      allowed[static_cast<std::size_t>(i)] = ok;
    }
    const int id = pick_token(last_row(branch, enc, prefix, nullptr, nullptr), allowed, sampling.temperature, rng);
    if (id < 0) break;
    const Token t = vocab().token_at(id);
    g.push(t);
    prefix.push_back(t);
    out.region.push_back(t);
    if (t.kind == TokenKind::kMotifEnd) return out;
  }

  out.truncated = true;
  TokenSeq closed = close_region(out.region, type, limit);
  out.region = closed.empty() ? motif_region : closed;
  return out;
}

VariantSet generate_variants(const std::array<const EncoderDecoder*, 5>& branches, const TokenSeq& motif_region,
                             const SamplingOptions& sampling) {
  std::array<TokenSeq, 5> regions;
  VariantSet set;
  for (int j = 1; j <= 5; ++j) {
    const auto* branch = branches[static_cast<std::size_t>(j - 1)];
    if (branch == nullptr || branch->kind() != ModelKind::kBranch) {
      throw std::invalid_argument("branch " + std::to_string(j) + " is missing or not a branch model");
    }
    auto result = generate_variant(*branch, motif_region, j, sampling);
    regions[static_cast<std::size_t>(j - 1)] = std::move(result.region);
    set.truncated[static_cast<std::size_t>(j - 1)] = result.truncated;
  }
  set.input = concat_segments(motif_region, regions);
  return set;
}

PhraseResult generate_phrase(const EncoderDecoder& model, const EncoderInput& input, const PhraseOptions& options) {
  if (model.kind() != ModelKind::kPhrase) throw std::invalid_argument("generate_phrase needs a phrase model");
  if (options.bars < 1) throw std::invalid_argument("bar count must be positive");
  NoGradGuard no_grad;
  ttmm::Rng rng(options.sampling.seed);
  const Var enc = model.encode(input.tokens);
  GrammarState g({options.bars, false});
  g.push(Token::bos());
  PhraseResult out;
  out.tokens.push_back(Token::bos());
  std::vector<bool> allowed(static_cast<std::size_t>(vocab().size()));
  std::vector<std::size_t> fallback;
  const auto max_len = static_cast<std::size_t>(model.config().max_len);

  while (true) {
    if (out.tokens.size() >= max_len) {
      out.hit_max_len = true;
      break;
    }
    // Pitch values never change what can follow, so one check covers them all.
    int pitch_viable = -1;
    for (int i = 0; i < vocab().size(); ++i) {
      const Token t = vocab().token_at(i);
      bool ok = g.allows(t);
      if (ok && t.kind != TokenKind::kEos) {
        if (t.kind == TokenKind::kPitch && pitch_viable >= 0) {
          ok = pitch_viable == 1;
        } else {
          GrammarState next = g;
          next.push(t);
          ok = can_finish(next);
          if (t.kind == TokenKind::kPitch) pitch_viable = ok ? 1 : 0;
        }
      }
      allowed[static_cast<std::size_t>(i)] = ok;
    }
    fallback.clear();
    const int id = pick_token(last_row(model, enc, out.tokens, &input.layout, &fallback), allowed,
                              options.sampling.temperature, rng);
    if (!fallback.empty() && fallback.back() + 1 == out.tokens.size()) ++out.mvape_fallbacks;
    if (id < 0) {
      out.dead_end = true;
      break;
    }
    const Token t = vocab().token_at(id);
    g.push(t);
    out.tokens.push_back(t);
    if (t.kind == TokenKind::kEos) return out;
  }
  out.tokens = remi::close_sequence(out.tokens);
  return out;
}

TokenSeq motif_region_tokens(const symbolic::Clip& clip) {
  remi::EncodeOptions opts;
  opts.include_chords = false;
  const TokenSeq seq = remi::encode(clip, opts);
  for (const auto& r : remi::find_regions(seq)) {
    if (r.type == 0) return TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(r.begin), seq.begin() + static_cast<std::ptrdiff_t>(r.end) + 1);
  }
  throw std::invalid_argument("clip has no motif label");
}

}  // namespace melotrans::mgm
