/**
 * @file mgm_test.cpp
 * @brief Autograd, masks, aligned positions, gating, training and decoding.
 */

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>

#include "melotrans/mgm/checkpoint.hpp"
#include "melotrans/mgm/generate.hpp"
#include "melotrans/mgm/train.hpp"
#include "melotrans/remi/codec.hpp"
#include "mgm_fixtures.hpp"

namespace melotrans::mgm {
namespace {

using remi::TokenKind;
using testing::NoteSpec;
using testing::region_tokens;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

struct FdCheck {
  double relative = 0.0;  // norm-wise relative error
  double analytic = 0.0;  // norm of the analytic gradient
  double numeric = 0.0;   // norm of the central-difference gradient
};

// Compares analytic and central-difference gradients of `loss` with respect
// to every entry of `p`.
FdCheck finite_difference(const Var& p, const std::function<Var()>& loss, double h = 1e-3) {
  p->grad.resize(0, 0);
  backward(loss());
  const Matrix analytic = p->grad;
  Matrix numeric(p->value.rows(), p->value.cols());
  for (Eigen::Index i = 0; i < p->value.size(); ++i) {
    const double keep = p->value.data()[i];
    p->value.data()[i] = keep + h;
    const double up = loss()->value(0, 0);
    p->value.data()[i] = keep - h;
    const double down = loss()->value(0, 0);
    p->value.data()[i] = keep;
    numeric.data()[i] = (up - down) / (2.0 * h);
  }
  FdCheck out{0.0, analytic.norm(), numeric.norm()};
  const double denom = out.analytic + out.numeric;
  out.relative = denom == 0.0 ? 0.0 : (analytic - numeric).norm() / denom;
  return out;
}

// ---------------------------------------------------------------- tensor ops

TEST(Tensor, ForwardValuesMatchDirectFormulas) {
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(rng, 3, 4), b = random_matrix(rng, 4, 2), c = random_matrix(rng, 5, 4);
  EXPECT_TRUE(matmul(constant(a), constant(b))->value.isApprox(a * b));
  EXPECT_TRUE(matmul_bt(constant(a), constant(c))->value.isApprox(a * c.transpose()));

  const Matrix g = Matrix::Ones(1, 4), s = Matrix::Zero(1, 4);
  const Matrix ln = layer_norm(constant(a), constant(g), constant(s), 0.0)->value;
  for (Eigen::Index r = 0; r < 3; ++r) {
    const double mean = a.row(r).mean();
    const double var = (a.row(r).array() - mean).square().mean();
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(ln(r, k), (a(r, k) - mean) / std::sqrt(var), 1e-12);
  }

  const Matrix sm = masked_softmax(constant(a), nullptr)->value;
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_NEAR(sm.row(r).sum(), 1.0, 1e-12);

  const std::vector<int> targets{0, 3, 1};
  double expected = 0.0;
  for (Eigen::Index r = 0; r < 3; ++r) {
    expected += std::log(a.row(r).array().exp().sum()) - a(r, targets[static_cast<std::size_t>(r)]);
  }
  EXPECT_NEAR(cross_entropy(constant(a), targets)->value(0, 0), expected / 3.0, 1e-12);

  EXPECT_NEAR(gelu(constant(Matrix::Constant(1, 1, 1.0)))->value(0, 0), 0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0))),
              1e-15);
}

TEST(Tensor, PrimitiveGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(2);
  const Var a = parameter(random_matrix(rng, 4, 5));
  const Var b = parameter(random_matrix(rng, 5, 3));
  const Var c = parameter(random_matrix(rng, 6, 5));
  const Var bias = parameter(random_matrix(rng, 1, 5));
  const Var gain = parameter(random_matrix(rng, 1, 5));
  const Var table = parameter(random_matrix(rng, 7, 5));
  const Matrix mask = causal_mask(4);
  Vector gate(4);
  gate << 1.0, 0.0, 0.25, 1.0;
  const std::vector<int> t4{0, 2, 1, 2};

  const std::function<Var()> graph = [&] {
    const Var x = add_row(add(a, gather_rows(table, {1, 3, 3, 6})), bias);
    const Var n = layer_norm(gelu(x), gain, bias);
    const Var att = masked_softmax(matmul_bt(n, slice_cols(concat_cols({c, c}), 2, 5)), nullptr);
    const Var sq = masked_softmax(matmul_bt(n, n), &mask);
    const Var mixed = scale_rows(add(matmul(att, c), matmul(sq, n)), gate);
    return cross_entropy(scale(matmul(mixed, b), 1.7), t4);
  };
  for (const Var& p : {a, b, c, bias, gain, table}) EXPECT_LT(finite_difference(p, graph).relative, 1e-6);
}

TEST(Tensor, NoGradGuardSkipsGraphConstruction) {
  const Var p = parameter(Matrix::Ones(2, 2));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    EXPECT_TRUE(matmul(p, p)->parents.empty());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_FALSE(matmul(p, p)->parents.empty());
}

TEST(Tensor, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(constant(Matrix::Zero(2, 3)), constant(Matrix::Zero(2, 3))), std::invalid_argument);
  EXPECT_THROW(add(constant(Matrix::Zero(2, 3)), constant(Matrix::Zero(3, 2))), std::invalid_argument);
}

// --------------------------------------------------------------------- masks

TEST(RegionMask, SingleRegionCoversLabelTokens) {
  const TokenSeq seq{Token::bos(),          Token::bar(),       Token::type(1),
                     Token::motif_start(),  Token::position(1), Token::pitch(60),
                     Token::duration(4),    Token::motif_end(), Token::eos()};
  const std::vector<std::uint8_t> expected{0, 0, 0, 1, 1, 1, 1, 1, 0};
  EXPECT_EQ(build_region_mask(seq), expected);
}

TEST(RegionMask, UnlabelledSequenceIsAllZero) {
  const TokenSeq seq{Token::bos(), Token::bar(), Token::position(1), Token::pitch(60), Token::duration(2), Token::eos()};
  for (auto bit : build_region_mask(seq)) EXPECT_EQ(bit, 0);
}

TEST(RegionMask, MalformedNestingThrows) {
  EXPECT_THROW(build_region_mask({Token::motif_start(), Token::motif_start(), Token::motif_end()}), MaskError);
  EXPECT_THROW(build_region_mask({Token::motif_end()}), MaskError);
  EXPECT_THROW(build_region_mask({Token::motif_start(), Token::position(1)}), MaskError);
  EXPECT_NO_THROW(build_region_mask({Token::motif_start(), Token::position(1)}, true));
}

TEST(MvMask, MatchesHandComputedValues) {
  const TokenSeq seq{Token::bos(),         Token::bar(),         Token::motif_start(), Token::position(1),
                     Token::pitch(60),     Token::duration(4),   Token::motif_end(),   Token::type(2),
                     Token::motif_start(), Token::position(5),   Token::pitch(62),     Token::duration(2),
                     Token::motif_end(),   Token::eos()};
  const auto m = build_mv_mask(seq, 4);
  EXPECT_EQ(m[0], 0);
  EXPECT_EQ(m[2], 1);   // motif, k = 0
  EXPECT_EQ(m[5], 4);   // motif, k = 3
  EXPECT_EQ(m[7], 0);   // Type token sits outside the region
  EXPECT_EQ(m[11], 20);  // type 2, k = 3: 2 * 8 + 3 + 1
  EXPECT_EQ(m[13], 0);
  EXPECT_EQ(decode_mv(20, 4), std::make_pair(2, 3));
  EXPECT_EQ(decode_mv(1, 4), std::make_pair(0, 0));
  EXPECT_THROW(decode_mv(0, 4), MaskError);
}

TEST(MvMask, OverlongRegionIsRejected) {
  const TokenSeq seq = region_tokens({{1, 60, 1}, {2, 62, 1}, {3, 64, 1}});  // 11 tokens
  EXPECT_NO_THROW(build_mv_mask(seq, 6));
  try {
    build_mv_mask(seq, 5);
    FAIL() << "expected MaskError";
  } catch (const MaskError& e) {
    EXPECT_NE(std::string(e.what()).find("type 0"), std::string::npos);
  }
}

TEST(MvMask, NonzeroValuesAreDistinctOnRandomSequences) {
  std::mt19937_64 rng(11);
  int with_repeats = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    testing::ClipShape shape;
    shape.chords = trial % 2 == 0;
    const TokenSeq seq = remi::encode(testing::random_remi_clip(rng, shape));
    const auto regions = scan_regions(seq);
    std::size_t longest = 1;
    std::array<int, kSegments> per_type{};
    for (const auto& r : regions) {
      longest = std::max(longest, r.end - r.begin);
      with_repeats += ++per_type[static_cast<std::size_t>(r.type)] == 2;
    }
    const int l_m = static_cast<int>(longest + 1) / 2 + 1;
    const auto m = build_mv_mask(seq, l_m);
    std::set<int> seen;
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      ++nonzero;
      seen.insert(m[i]);
      const auto [type, k] = decode_mv(m[i], l_m);
      const auto& r = *std::find_if(regions.begin(), regions.end(), [&](const auto& x) { return i >= x.begin && i < x.end; });
      EXPECT_EQ(type, r.type);
      EXPECT_EQ(static_cast<std::size_t>(k), i - r.begin);
    }
    ASSERT_EQ(seen.size(), nonzero) << "trial " << trial;
  }
  EXPECT_GT(with_repeats, 100);  // repeated region types were exercised
}

// --------------------------------------------------------------------- MVAPE

TEST(Mvape, SinusoidMatchesClosedForm) {
  for (int col = 0; col < 8; ++col) {
    const double angle = 5.0 / std::pow(10000.0, static_cast<double>(2 * (col / 2)) / 8.0);
    EXPECT_NEAR(pe_value(5, col, 8), col % 2 == 0 ? std::sin(angle) : std::cos(angle), 1e-15);
  }
}

TEST(Mvape, HandPlacedRegionsTakeSpanPositions) {
  EncoderLayout layout;
  layout.spans[2] = {12, 16};
  TokenSeq dec(47, Token::bar());
  dec.insert(dec.end(), {Token::type(2), Token::motif_start(), Token::position(1), Token::pitch(60),
                         Token::motif_end(), Token::bar()});
  const auto aligned = mvape_positions(dec, layout, false);
  EXPECT_EQ(aligned.positions[48], 12u);
  EXPECT_EQ(aligned.positions[50], 14u);
  EXPECT_EQ(aligned.positions[47], 47u);  // Type token: ordinary position
  EXPECT_EQ(aligned.positions[52], 52u);
  EXPECT_TRUE(aligned.fallback.empty());
  const Matrix pe = mvape(aligned, 16);
  const Matrix ref = positional_encoding(60, 16);
  EXPECT_EQ(pe.row(50), ref.row(14));
  EXPECT_EQ(pe.row(52), ref.row(52));
}

TEST(Mvape, RunningPastSpanFallsBackAndFlags) {
  EncoderLayout layout;
  layout.spans[1] = {3, 5};
  const TokenSeq dec{Token::bos(), Token::type(1), Token::motif_start(), Token::position(1), Token::pitch(60)};
  const auto aligned = mvape_positions(dec, layout, true);
  EXPECT_EQ(aligned.positions[2], 3u);
  EXPECT_EQ(aligned.positions[3], 4u);
  EXPECT_EQ(aligned.positions[4], 4u);
  EXPECT_EQ(aligned.fallback, std::vector<std::size_t>{4});
}

TEST(Mvape, InRegionEncodingsEqualEncoderSpanEncodingsOnRandomLayouts) {
  std::mt19937_64 rng(21);
  const int d = 32;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<TokenSeq, 5> variants;
    const TokenSeq motif = region_tokens(testing::random_motif_notes(rng, 50, 80, 6));
    for (auto& v : variants) v = region_tokens(testing::random_motif_notes(rng, 50, 80, 6));
    const EncoderInput input = concat_segments(motif, variants);
    const Matrix enc_pe = positional_encoding(input.tokens.size(), d);

    // Decoder: filler bars with region copies of random types dropped in.
    TokenSeq dec{Token::bos()};
    std::vector<std::pair<std::size_t, int>> starts;
    const int placed = testing::uniform(rng, 1, 8);
    for (int r = 0; r < placed; ++r) {
      for (int f = testing::uniform(rng, 0, 5); f > 0; --f) dec.push_back(Token::bar());
      const int j = testing::uniform(rng, 0, 5);
      if (j > 0) dec.push_back(Token::type(j));
      starts.push_back({dec.size(), j});
      const TokenSeq& src = j == 0 ? motif : variants[static_cast<std::size_t>(j - 1)];
      dec.insert(dec.end(), src.begin(), src.end());
    }
    const auto aligned = mvape_positions(dec, input.layout, false);
    ASSERT_TRUE(aligned.fallback.empty());
    const Matrix pe = mvape(aligned, d);
    for (const auto& [start, j] : starts) {
      const Span span = input.layout.spans[static_cast<std::size_t>(j)];
      for (std::size_t rho = 0; rho < span.size(); ++rho) {
        ASSERT_EQ(input.tokens[span.begin + rho], dec[start + rho]);
        for (int c = 0; c < d; ++c) {
          ASSERT_EQ(pe(static_cast<Eigen::Index>(start + rho), c), enc_pe(static_cast<Eigen::Index>(span.begin + rho), c))
              << "trial " << trial;
        }
      }
    }
  }
}

TEST(Layout, SpansAreDisjointOrderedAndCoverRegions) {
  std::mt19937_64 rng(5);
  std::array<TokenSeq, 5> variants;
  for (auto& v : variants) v = region_tokens(testing::random_motif_notes(rng, 50, 80));
  const EncoderInput in = concat_segments(region_tokens({{1, 60, 2}, {5, 62, 2}}), variants);
  EXPECT_EQ(in.l_m, 8);
  EXPECT_EQ(in.tokens.front(), Token::bos());
  EXPECT_EQ(in.tokens.back(), Token::eos());
  const auto regions = scan_regions(in.tokens);
  ASSERT_EQ(regions.size(), 6u);
  for (int j = 0; j < kSegments; ++j) {
    const auto& span = in.layout.spans[static_cast<std::size_t>(j)];
    EXPECT_EQ(regions[static_cast<std::size_t>(j)].type, j);
    EXPECT_EQ(regions[static_cast<std::size_t>(j)].begin, span.begin);
    EXPECT_EQ(regions[static_cast<std::size_t>(j)].end, span.end);
    if (j > 0) {
      EXPECT_GT(span.begin, in.layout.spans[static_cast<std::size_t>(j - 1)].end);
    }
  }
}

// ---------------------------------------------------------------- gated layer

struct GatedToy {
  ParamStore store;
  ttmm::Rng init{3};
  GatedDecoderLayer layer{store, "g", 8, 2, 16, init};
  std::mt19937_64 rng{4};
  Var xc = constant(random_matrix(rng, 12, 8));
  Var xs = constant(random_matrix(rng, 12, 8));
  Var enc = constant(random_matrix(rng, 9, 8));
  Matrix causal = causal_mask(12);
};

TEST(GatedLayer, HardGateSelectsExactlyOneBranch) {
  GatedToy t;
  const Var cross = t.layer.cross_attn(t.layer.norm_cross(t.xc), t.enc, nullptr);
  const Var ns = t.layer.norm_self(t.xs);
  const Var self = t.layer.self_attn(ns, ns, &t.causal);
  Vector region = Vector::Zero(12);
  for (int i = 3; i < 8; ++i) region(i) = 1.0;
  const Matrix mixed = t.layer.gated_attention(t.xc, t.xs, t.enc, region, t.causal)->value;
  for (Eigen::Index i = 0; i < 12; ++i) {
    const Matrix& want = region(i) == 1.0 ? cross->value : self->value;
    EXPECT_EQ(mixed.row(i), want.row(i)) << "row " << i;
  }
  EXPECT_EQ(t.layer.gated_attention(t.xc, t.xs, t.enc, Vector::Ones(12), t.causal)->value, cross->value);
  EXPECT_EQ(t.layer.gated_attention(t.xc, t.xs, t.enc, Vector::Zero(12), t.causal)->value, self->value);
}

TEST(GatedLayer, GradientsMatchFiniteDifferences) {
  const auto began = std::chrono::steady_clock::now();
  GatedToy t;
  Vector region = Vector::Zero(12);
  for (int i = 2; i < 9; ++i) region(i) = 1.0;
  std::vector<int> targets;
  for (int i = 0; i < 12; ++i) targets.push_back((i * 5) % 8);
  const std::function<Var()> loss = [&] {
    return cross_entropy(t.layer(t.xc, t.xs, t.enc, region, t.causal), targets);
  };
  ASSERT_EQ(t.store.all().size(), 26u);  // 3 norms x2, 2 attentions x8, ff x4
  for (const auto& [name, p] : t.store.all()) {
    const FdCheck fd = finite_difference(p, loss);
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".k.b") == 0) {
      // A key bias adds the same score to every key of a query, which softmax
      // ignores: the true gradient is zero, so both sides must vanish.
      EXPECT_LT(fd.analytic, 1e-10) << name;
      EXPECT_LT(fd.numeric, 1e-8) << name;
      continue;
    }
    EXPECT_LT(fd.relative, 1e-4) << name;
    EXPECT_GT(fd.analytic, 1e-6) << name << " received no gradient";
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - began).count(), 10.0);
}

TEST(GatedLayer, LengthMismatchThrows) {
  GatedToy t;
  EXPECT_THROW(t.layer.gated_attention(t.xc, t.xs, t.enc, Vector::Ones(5), t.causal), std::invalid_argument);
}

// --------------------------------------------------------------------- model

ModelConfig tiny_config() {
  ModelConfig c = ModelConfig::desk();
  c.d_model = 16;
  c.d_ff = 32;
  c.layers_enc = 1;
  c.layers_dec = 1;
  c.max_len = 256;
  return c;
}

TEST(Model, ConfigPresetsAndValidation) {
  const ModelConfig full = ModelConfig::full();
  EXPECT_EQ(full.layers_enc, 6);
  EXPECT_EQ(full.heads, 8);
  EXPECT_EQ(full.d_model, 256);
  EXPECT_EQ(full.d_ff, 2048);
  EXPECT_EQ(full.max_len, 1024);
  EXPECT_DOUBLE_EQ(full.lr, 2e-4);
  EXPECT_DOUBLE_EQ(full.beta2, 0.99);
  EXPECT_EQ(full.batch, 4);
  ModelConfig bad = ModelConfig::desk();
  bad.heads = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Model, PhraseDecodeNeedsLayoutAndRespectsMaxLen) {
  const EncoderDecoder phrase(tiny_config(), ModelKind::kPhrase);
  const Var enc = phrase.encode({Token::bos(), Token::eos()});
  EXPECT_THROW(phrase.decode(enc, {Token::bos()}), std::invalid_argument);
  EXPECT_THROW(phrase.encode(TokenSeq(257, Token::bar())), std::invalid_argument);
}

TEST(Model, DecoderIsCausal) {
  const EncoderDecoder branch(tiny_config(), ModelKind::kBranch);
  const TokenSeq src = region_tokens({{1, 60, 2}, {5, 64, 2}});
  const Var enc = branch.encode(src);
  const TokenSeq a{Token::bos(), Token::motif_start(), Token::position(1), Token::pitch(60)};
  TokenSeq b = a;
  b.back() = Token::pitch(70);
  const Matrix la = branch.decode(enc, a)->value, lb = branch.decode(enc, b)->value;
  EXPECT_EQ(la.topRows(3), lb.topRows(3));
  EXPECT_NE(la.row(3), lb.row(3));
}

TEST(Training, EmptyCorpusThrows) {
  EncoderDecoder m(tiny_config(), ModelKind::kBranch);
  EXPECT_THROW(train(m, {}, train_options(m.config())), std::invalid_argument);
}

TEST(Training, SameSeedGivesBitIdenticalRuns) {
  const auto data = testing::shift_corpus(3, 6, 0);
  TrainOptions o = train_options(tiny_config());
  o.epochs = 3;
  EncoderDecoder a(tiny_config(), ModelKind::kBranch), b(tiny_config(), ModelKind::kBranch);
  const auto ra = train(a, data, o), rb = train(b, data, o);
  EXPECT_EQ(ra.epoch_nll, rb.epoch_nll);
  for (std::size_t i = 0; i < a.params().all().size(); ++i) {
    EXPECT_EQ(a.params().all()[i].second->value, b.params().all()[i].second->value);
  }
}

TEST(Training, LossLogHasOneLinePerEpoch) {
  const auto data = testing::shift_corpus(3, 4, 0);
  TrainOptions o = train_options(tiny_config());
  o.epochs = 2;
  o.tag = "branch1";
  std::ostringstream log;
  o.log = &log;
  EncoderDecoder m(tiny_config(), ModelKind::kBranch);
  const auto report = train(m, data, o);
  std::istringstream lines(log.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    EXPECT_EQ(line.rfind(std::to_string(count) + "\tbranch1\t", 0), 0u) << line;
  }
  EXPECT_EQ(count, 2);
  EXPECT_EQ(report.epochs_run, 2);
}

// Type-1 branch overfits copy pairs, then reproduces the motif when decoding.
// Once teacher-forced accuracy is 100%, greedy decoding must copy exactly.
TEST(Training, IdentityBranchOverfitsFiftyPairs) {
  const auto data = testing::shift_corpus(101, 50, 0);
  EncoderDecoder branch(ModelConfig::desk(), ModelKind::kBranch);
  TrainOptions o = train_options(branch.config());
  ASSERT_EQ(o.epochs, 200);
  int reached_99 = 0;
  double acc = 0.0;
  o.stop_when = [&](int epoch, double) {
    acc = token_accuracy(branch, data).value();
    if (acc >= 0.99 && reached_99 == 0) reached_99 = epoch;
    return acc == 1.0;
  };
  const auto report = train(branch, data, o);
  std::printf("identity branch: 99%% at epoch %d, %.4f after %d epochs\n", reached_99, acc, report.epochs_run);
  EXPECT_GT(reached_99, 0) << "never reached 99% token accuracy in 200 epochs";
  EXPECT_LE(reached_99, 200);
  ASSERT_EQ(acc, 1.0);

  for (const auto& ex : data) {
    const auto v = generate_variant(branch, ex.src, 1, {});
    EXPECT_FALSE(v.truncated);
    EXPECT_EQ(v.region, ex.src);
  }
}

TEST(Training, TransposeBranchGeneralisesToHeldOutMotifs) {
  const auto data = testing::shift_corpus(202, 500, 2);
  const auto held_out = testing::shift_corpus(303, 100, 2);
  EncoderDecoder branch(ModelConfig::desk(), ModelKind::kBranch);
  TrainOptions o = train_options(branch.config());
  o.stop_when = [](int, double nll) { return nll < 0.02; };
  const auto report = train(branch, data, o);
  const double acc = token_accuracy(branch, held_out).value();
  std::printf("transpose branch: %d epochs, held-out token accuracy %.4f\n", report.epochs_run, acc);
  EXPECT_GE(acc, 0.90);
}

// ---------------------------------------------------------------- generation

std::array<EncoderDecoder, 5> untrained_branches() {
  std::array<EncoderDecoder, 5> out{
      EncoderDecoder(tiny_config(), ModelKind::kBranch), EncoderDecoder(tiny_config(), ModelKind::kBranch),
      EncoderDecoder(tiny_config(), ModelKind::kBranch), EncoderDecoder(tiny_config(), ModelKind::kBranch),
      EncoderDecoder(tiny_config(), ModelKind::kBranch)};
  return out;
}

TEST(Generation, UntrainedGreedyVariantsAreDeterministicAndWellFormed) {
  const auto branches = untrained_branches();
  std::array<const EncoderDecoder*, 5> ptrs{};
  for (int j = 0; j < 5; ++j) ptrs[static_cast<std::size_t>(j)] = &branches[static_cast<std::size_t>(j)];
  const TokenSeq motif = region_tokens({{1, 60, 2}, {3, 62, 2}, {5, 64, 4}});
  const auto a = generate_variants(ptrs, motif, {});
  const auto b = generate_variants(ptrs, motif, {});
  EXPECT_EQ(a.input.tokens, b.input.tokens);
  const auto regions = scan_regions(a.input.tokens);
  ASSERT_EQ(regions.size(), 6u);
  for (int j = 1; j <= 5; ++j) {
    const Span span = a.input.layout.spans[static_cast<std::size_t>(j)];
    EXPECT_LE(span.size(), 2 * motif.size() - 1);
    // Each variant decodes as a labelled region opening a bar, with room for
    // notes that ring into the following bars.
    TokenSeq wrapped{Token::bos(), Token::bar(), Token::type(j)};
    wrapped.insert(wrapped.end(), a.input.tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                   a.input.tokens.begin() + static_cast<std::ptrdiff_t>(span.end));
    wrapped.insert(wrapped.end(), {Token::bar(), Token::bar(), Token::eos()});
    EXPECT_NO_THROW(remi::decode(wrapped)) << "variant " << j;
  }
}

TEST(Generation, TemperatureSamplingIsSeeded) {
  const EncoderDecoder branch(tiny_config(), ModelKind::kBranch);
  const TokenSeq motif = region_tokens({{1, 60, 2}, {3, 62, 2}, {5, 64, 4}});
  SamplingOptions s{1.0, 99};
  EXPECT_EQ(generate_variant(branch, motif, 3, s).region, generate_variant(branch, motif, 3, s).region);
}

TEST(Generation, PickTokenHonoursMaskAndTies) {
  ttmm::Rng rng(1);
  Eigen::RowVectorXd logits(4);
  logits << 5.0, 1.0, 1.0, 9.0;
  EXPECT_EQ(pick_token(logits, {true, true, true, false}, 0.0, rng), 0);
  EXPECT_EQ(pick_token(logits, {false, true, true, false}, 0.0, rng), 1);
  EXPECT_EQ(pick_token(logits, {false, false, false, false}, 0.0, rng), -1);
  for (int i = 0; i < 50; ++i) EXPECT_NE(pick_token(logits, {true, false, true, false}, 2.0, rng), 1);
}

TEST(Generation, PhraseOutputDecodesAndIsReproducible) {
  const EncoderDecoder phrase(tiny_config(), ModelKind::kPhrase);
  std::array<TokenSeq, 5> variants;
  for (int j = 0; j < 5; ++j) variants[static_cast<std::size_t>(j)] = region_tokens({{1, 60 + j, 2}, {9, 64, 4}});
  const EncoderInput input = concat_segments(region_tokens({{1, 60, 2}, {9, 64, 4}}), variants);
  PhraseOptions o;
  o.bars = 4;
  const auto a = generate_phrase(phrase, input, o);
  const auto b = generate_phrase(phrase, input, o);
  EXPECT_EQ(a.tokens, b.tokens);
  const auto clip = remi::decode(a.tokens);
  EXPECT_FALSE(a.dead_end);
  if (!a.hit_max_len) {
    EXPECT_EQ(std::count(a.tokens.begin(), a.tokens.end(), Token::bar()), 4);
  }
  for (std::size_t i = 1; i < clip.melody.size(); ++i) EXPECT_LE(clip.melody[i - 1].end(), clip.melody[i].start);
}

TEST(Generation, PhraseHittingMaxLenIsClosed) {
  ModelConfig c = tiny_config();
  c.max_len = 40;
  const EncoderDecoder phrase(c, ModelKind::kPhrase);
  std::array<TokenSeq, 5> variants;
  for (auto& v : variants) v = region_tokens({{1, 60, 2}});
  const EncoderInput input = concat_segments(region_tokens({{1, 60, 2}}), variants);
  ASSERT_LE(input.tokens.size(), 40u);
  PhraseOptions o;
  o.bars = 60;  // needs at least 62 tokens
  const auto out = generate_phrase(phrase, input, o);
  EXPECT_TRUE(out.hit_max_len);
  EXPECT_EQ(out.tokens.back(), Token::eos());
  EXPECT_NO_THROW(remi::decode(out.tokens));

  EncoderInput too_long = input;
  too_long.tokens.insert(too_long.tokens.begin() + 1, 10, Token::bar());
  EXPECT_THROW(generate_phrase(phrase, too_long, o), std::invalid_argument);
}

// ---------------------------------------------------------------- checkpoint

TEST(Checkpoint, RoundTripRestoresParametersAndOutputs) {
  ModelConfig c = tiny_config();
  c.seed = 77;
  const EncoderDecoder model(c, ModelKind::kPhrase);
  const std::string path = ::testing::TempDir() + "mgm_roundtrip.ckpt";
  save_checkpoint(model, path);
  const auto loaded = load_checkpoint(path);
  EXPECT_EQ(loaded->config(), c);
  EXPECT_EQ(loaded->kind(), ModelKind::kPhrase);
  ASSERT_EQ(loaded->params().all().size(), model.params().all().size());
  for (std::size_t i = 0; i < model.params().all().size(); ++i) {
    EXPECT_EQ(loaded->params().all()[i].first, model.params().all()[i].first);
    EXPECT_EQ(loaded->params().all()[i].second->value, model.params().all()[i].second->value);
  }
  std::remove(path.c_str());
}

TEST(Checkpoint, RejectsForeignAndTruncatedFiles) {
  const std::string path = ::testing::TempDir() + "mgm_bad.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and some bytes";
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  const EncoderDecoder model(tiny_config(), ModelKind::kBranch);
  save_checkpoint(model, path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  EXPECT_THROW(load_checkpoint(path + ".missing"), CheckpointError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace melotrans::mgm
