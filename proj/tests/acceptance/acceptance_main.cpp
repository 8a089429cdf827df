/**
 * @file acceptance_main.cpp
 * @brief Acceptance run: one PASS/FAIL line per criterion, exit status 1 if
 * any criterion fails. Oracles are local to this file or tests/support.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "clip_generators.hpp"
#include "labeler_oracle.hpp"
#include "melotrans/labeler/variant_labeler.hpp"
#include "melotrans/metrics/metrics.hpp"
#include "melotrans/mgm/generate.hpp"
#include "melotrans/mgm/layers.hpp"
#include "melotrans/mgm/masks.hpp"
#include "melotrans/pipeline/synth_corpus.hpp"
#include "melotrans/remi/codec.hpp"
#include "melotrans/symbolic/midi.hpp"
#include "melotrans/ttmm/motif_synth.hpp"
#include "mgm_fixtures.hpp"

namespace melotrans {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// ------------------------------------------------------------------- 1

Outcome metric_fidelity() {
  const auto t0 = Clock::now();
  const metrics::TypeCounts counts{2744, 1497, 1372, 6362, 499};
  const auto vp = metrics::proportions_from_counts(counts);
  const double secs = seconds_since(t0);
  const std::array<double, 5> want{0.22, 0.12, 0.11, 0.51, 0.04};
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i) worst = std::max(worst, std::abs(vp[i] - want[i]));
  char buf[160];
  std::snprintf(buf, sizeof buf, "VP (%.4f %.4f %.4f %.4f %.4f), max deviation %.4f, %.3f s", vp[0], vp[1], vp[2],
                vp[3], vp[4], worst, secs);
  return {worst <= 0.005 && secs < 1.0, buf};
}

// ------------------------------------------------------------------- 2

Outcome labeler_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(9001);
  int mismatches = 0;
  std::size_t labels = 0;
  for (int i = 0; i < 1000; ++i) {
    const symbolic::Clip clip = testing::random_motif_clip(rng, 8);
    const auto& motif = clip.motif_labels[0];
    const auto got = labeler::label_variants(clip, motif);
    labels += got.size();
    mismatches += got != testing::oracle_label_variants(clip, motif);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "1000 clips, " << labels << " labels, " << mismatches << " mismatches, " << secs << " s";
  return {mismatches == 0 && secs < 60.0, d.str()};
}

// ------------------------------------------------------------------- 3

Outcome transform_classification() {
  using pipeline::Transform;
  const std::map<Transform, int> canonical{{Transform::kCopy, 1},
                                           {Transform::kTranspose, 2},
                                           {Transform::kInvert, 5},
                                           {Transform::kInsert, 4},
                                           {Transform::kRemove, 4}};
  std::map<Transform, std::pair<int, int>> tally;  // (agree, total)
  pipeline::SynthOptions opts;
  opts.cover_all_types = false;
  int clip_index = 0;
  auto enough = [&] {
    for (const auto& [t, type] : canonical) {
      if (tally[t].second < 500) return false;
    }
    return true;
  };
  while (!enough()) {
    ttmm::Rng rng(700000 + static_cast<std::uint64_t>(clip_index++));
    const auto sc = pipeline::synth_clip(rng, opts);
    const symbolic::Clip labelled = labeler::label_clip(sc.clip);
    for (const auto& p : sc.placements) {
      const auto it = canonical.find(p.transform);
      if (it == canonical.end() || tally[p.transform].second >= 500) continue;
      int got = 0;
      for (const auto& v : labelled.variant_labels) {
        if (v.start == p.bar * symbolic::kTicksPerBar) got = v.type;
      }
      tally[p.transform].first += got == it->second;
      ++tally[p.transform].second;
    }
  }
  bool pass = true;
  std::ostringstream d;
  for (const auto& [t, counts] : tally) {
    d << pipeline::transform_name(t) << ' ' << counts.first << '/' << counts.second << "  ";
    pass = pass && counts.first == counts.second;
  }
  d << "(" << clip_index << " clips)";
  return {pass, d.str()};
}

// ------------------------------------------------------------------- 4

Outcome ttmm_properties() {
  const auto t0 = Clock::now();
  // Arousal thirds select note-density and duration bins; higher arousal
  // means denser, shorter notes.
  const double nd_edges[4] = {0.0, 3.5, 5.0, 8.0};
  const double nad_edges[4] = {2.0, 1.2, 0.8, 0.0};
  ttmm::Rng rng(31337);
  int failures = 0;
  std::string first;
  for (int i = 0; i < 10000; ++i) {
    const ttmm::VAPoint va{1.0 + 8.0 * rng.uniform01(), rng.uniform_left_open(0.0, 9.0)};
    const int key = 48 + static_cast<int>(rng.below(25));
    const auto f = ttmm::va_to_features(va, rng);
    const auto clip = ttmm::features_to_motif(f, key, rng);
    const int bin = va.arousal <= 3.0 ? 1 : (va.arousal <= 6.0 ? 2 : 3);
    const bool major = va.valence <= 5.0;
    const std::vector<int> steps = major ? std::vector<int>{0, 2, 4, 5, 7, 9, 11} : std::vector<int>{0, 2, 3, 5, 7, 8, 10};
    bool ok = clip.melody.size() >= 2;
    int sum = 0;
    for (const auto& n : clip.melody) {
      sum += n.duration;
      const int rel = ((n.pitch - key) % 12 + 12) % 12;
      ok = ok && n.pitch >= key && n.pitch <= key + 12 && std::find(steps.begin(), steps.end(), rel) != steps.end();
    }
    ok = ok && sum == symbolic::kTicksPerBar;
    ok = ok && f.nd > nd_edges[bin - 1] && f.nd <= nd_edges[bin];
    ok = ok && f.nad <= nad_edges[bin - 1] && f.nad > nad_edges[bin];
    ok = ok && (f.mode == ttmm::Mode::kMajor) == major;
    if (!ok && failures++ == 0) first = "first failure at sample " + std::to_string(i);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "10000 motifs, " << failures << " failures, " << secs << " s" << (first.empty() ? "" : "; " + first);
  return {failures == 0 && secs < 30.0, d.str()};
}

// ------------------------------------------------------------------- 5

Outcome mvape_alignment() {
  using remi::Token;
  using remi::TokenSeq;
  std::mt19937_64 rng(55);
  const int d = 64;
  std::size_t compared = 0;
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::array<TokenSeq, 5> variants;
    const TokenSeq motif = testing::region_tokens(testing::random_motif_notes(rng, 48, 84, 6));
    for (auto& v : variants) v = testing::region_tokens(testing::random_motif_notes(rng, 48, 84, 6));
    const auto input = mgm::concat_segments(motif, variants);
    TokenSeq dec{Token::bos()};
    std::vector<std::pair<std::size_t, int>> starts;
    for (int r = testing::uniform(rng, 1, 10); r > 0; --r) {
      for (int f = testing::uniform(rng, 0, 6); f > 0; --f) dec.push_back(Token::bar());
      const int j = testing::uniform(rng, 0, 5);
      if (j > 0) dec.push_back(Token::type(j));
      starts.push_back({dec.size(), j});
      const TokenSeq& src = j == 0 ? motif : variants[static_cast<std::size_t>(j - 1)];
      dec.insert(dec.end(), src.begin(), src.end());
    }
    const mgm::Matrix enc_pe = mgm::positional_encoding(input.tokens.size(), d);
    const mgm::Matrix pe = mgm::mvape(mgm::mvape_positions(dec, input.layout, false), d);
    for (const auto& [start, j] : starts) {
      const auto span = input.layout.spans[static_cast<std::size_t>(j)];
      for (std::size_t rho = 0; rho < span.size(); ++rho) {
        mismatches += dec[start + rho] != input.tokens[span.begin + rho];
        for (int c = 0; c < d; ++c) {
          ++compared;
          mismatches += pe(static_cast<Eigen::Index>(start + rho), c) != enc_pe(static_cast<Eigen::Index>(span.begin + rho), c);
        }
      }
    }
  }
  std::ostringstream d_out;
  d_out << "100 layouts, " << compared << " entries compared, " << mismatches << " differ";
  return {mismatches == 0 && compared > 0, d_out.str()};
}

// ------------------------------------------------------------------- 6

Outcome mask_uniqueness() {
  std::mt19937_64 rng(66);
  int collisions = 0;
  std::size_t values = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    testing::ClipShape shape;
    shape.chords = trial % 2 == 1;
    const auto seq = remi::encode(testing::random_remi_clip(rng, shape));
    std::size_t longest = 1;
    for (const auto& r : mgm::scan_regions(seq)) longest = std::max(longest, r.end - r.begin);
    const auto m = mgm::build_mv_mask(seq, static_cast<int>(longest + 1) / 2 + 1);
    std::set<int> seen;
    for (int v : m) {
      if (v == 0) continue;
      ++values;
      collisions += !seen.insert(v).second;
    }
  }
  std::ostringstream d;
  d << "1000 sequences, " << values << " nonzero values, " << collisions << " collisions";
  return {collisions == 0 && values > 0, d.str()};
}

// ------------------------------------------------------------------- 7

Outcome gradient_check() {
  const auto t0 = Clock::now();
  mgm::ParamStore store;
  ttmm::Rng init(3);
  mgm::GatedDecoderLayer layer(store, "g", 8, 2, 16, init);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random = [&](int r, int c) {
    mgm::Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return mgm::constant(m);
  };
  const mgm::Var xc = random(12, 8), xs = random(12, 8), enc = random(9, 8);
  const mgm::Matrix causal = mgm::causal_mask(12);
  mgm::Vector region = mgm::Vector::Zero(12);
  for (int i = 2; i < 9; ++i) region(i) = 1.0;
  std::vector<int> targets;
  for (int i = 0; i < 12; ++i) targets.push_back((i * 5) % 8);
  auto loss = [&] { return mgm::cross_entropy(layer(xc, xs, enc, region, causal), targets); };

  double worst = 0.0;
  std::string worst_name;
  bool ok = true;
  const double h = 1e-3;
  for (const auto& [name, p] : store.all()) {
    p->grad.resize(0, 0);
    mgm::backward(loss());
    const mgm::Matrix analytic = p->grad;
    mgm::Matrix numeric(p->value.rows(), p->value.cols());
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double keep = p->value.data()[i];
      p->value.data()[i] = keep + h;
      const double up = loss()->value(0, 0);
      p->value.data()[i] = keep - h;
      const double down = loss()->value(0, 0);
      p->value.data()[i] = keep;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    const double denom = analytic.norm() + numeric.norm();
    if (denom < 1e-8) continue;  // key biases: softmax is shift invariant, both sides vanish
    const double rel = (analytic - numeric).norm() / denom;
    if (rel > worst) {
      worst = rel;
      worst_name = name;
    }
    ok = ok && rel < 1e-4;
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << store.all().size() << " parameter groups, worst relative error " << worst << " (" << worst_name << "), "
    << secs << " s";
  return {ok && secs < 10.0, d.str()};
}

// ------------------------------------------------------------------- 8

Outcome desk_learning() {
  const auto t0 = Clock::now();
  const auto identity = testing::shift_corpus(101, 50, 0);
  mgm::EncoderDecoder copy_branch(mgm::ModelConfig::desk(), mgm::ModelKind::kBranch);
  mgm::TrainOptions o = mgm::train_options(copy_branch.config());
  int reached = 0;
  o.stop_when = [&](int epoch, double) {
    if (mgm::token_accuracy(copy_branch, identity).value() >= 0.99) reached = epoch;
    return reached > 0;
  };
  mgm::train(copy_branch, identity, o);

  const auto train_set = testing::shift_corpus(202, 500, 2);
  const auto held_out = testing::shift_corpus(303, 100, 2);
  mgm::EncoderDecoder shift_branch(mgm::ModelConfig::desk(), mgm::ModelKind::kBranch);
  mgm::TrainOptions o2 = mgm::train_options(shift_branch.config());
  o2.stop_when = [](int, double nll) { return nll < 0.02; };
  const auto rep = mgm::train(shift_branch, train_set, o2);
  const double acc = mgm::token_accuracy(shift_branch, held_out).value();
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "identity: 99% at epoch " << reached << "; transpose +2: held-out accuracy " << acc << " after "
    << rep.epochs_run << " epochs; " << secs << " s";
  return {reached > 0 && reached <= 200 && acc >= 0.90 && secs < 1800.0, d.str()};
}

// ------------------------------------------------------------------- 9

Outcome round_trips() {
  std::mt19937_64 rng(99);
  int midi_bad = 0, remi_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const symbolic::Clip c = testing::random_clip(rng);
    midi_bad += symbolic::parse_midi(symbolic::write_midi(c)) != c;
    const symbolic::Clip r = testing::random_remi_clip(rng);
    remi_bad += remi::decode(remi::encode(r)) != r;
  }
  std::ostringstream d;
  d << "1000 clips each; MIDI mismatches " << midi_bad << ", REMI mismatches " << remi_bad;
  return {midi_bad == 0 && remi_bad == 0, d.str()};
}

// ------------------------------------------------------------------- 10

Outcome non_reproducibility() {
  std::ifstream f(MELOTRANS_README);
  const std::string text{std::istreambuf_iterator<char>(f), {}};
  const bool documented = text.find("## Not reproduced") != std::string::npos;
  return {documented,
          documented ? "model-level VP/VD on the reference dataset and listening-test scores need the full "
                       "dataset and full-scale training; documented as out of reach, criteria 1-9 stand in"
                     : "README lacks the 'Not reproduced' section"};
}

}  // namespace
}  // namespace melotrans

int main() {
  using namespace melotrans;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric fidelity", metric_fidelity},
      {"labeler oracle equivalence", labeler_oracle},
      {"canonical transform classification", transform_classification},
      {"motif synthesis properties", ttmm_properties},
      {"aligned positional encoding", mvape_alignment},
      {"mask uniqueness", mask_uniqueness},
      {"gradient check", gradient_check},
      {"desk-scale learning", desk_learning},
      {"round trips", round_trips},
      {"non-reproducibility statement", non_reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
