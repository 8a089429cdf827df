/**
 * @file ttmm_test.cpp
 * @brief Tests for the text/VA to motif path.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "melotrans/ttmm/motif_synth.hpp"

namespace melotrans::ttmm {
namespace {

TEST(Rng, DrawsStayInRange) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double x = rng.uniform_left_open(1.2, 2.0);
    ASSERT_GT(x, 1.2);
    ASSERT_LE(x, 2.0);
    ASSERT_LT(rng.below(7), 7u);
  }
  EXPECT_THROW(rng.below(0), std::invalid_argument);
}

TEST(Rng, EngineIsStandardMersenneTwister) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  Rng rng(5489u);
  for (int i = 0; i < 9999; ++i) rng.next();
  EXPECT_EQ(rng.next(), 9981545732273789042ull);
}

TEST(VaProvider, BypassReturnsGivenPoint) {
  const BypassProvider p(parse_va("3,8"));
  EXPECT_EQ(text_to_va(p, "anything"), (VAPoint{3, 8}));
}

TEST(VaProvider, LexiconSingleWord) {
  const LexiconProvider p;
  EXPECT_EQ(text_to_va(p, "A sad tune."), (VAPoint{7.5, 2.5}));
}

TEST(VaProvider, LexiconAveragesHits) {
  const LexiconProvider p({{"sad", {7.5, 2.5}}, {"happy", {2.0, 7.0}}});
  const VAPoint va = text_to_va(p, "Happy, then SAD");
  EXPECT_DOUBLE_EQ(va.valence, 4.75);
  EXPECT_DOUBLE_EQ(va.arousal, 4.75);
}

TEST(VaProvider, LexiconWithoutHitsIsNeutral) {
  EXPECT_EQ(text_to_va(LexiconProvider(), "a song about trains"), (VAPoint{5, 5}));
}

TEST(VaProvider, LexiconFromTsv) {
  const std::string path = ::testing::TempDir() + "lexicon.tsv";
  {
    std::ofstream out(path);
    out << "# word valence arousal\nStormy\t6.5\t8\n";
  }
  EXPECT_EQ(text_to_va(LexiconProvider::from_tsv(path), "stormy night"), (VAPoint{6.5, 8}));
  {
    std::ofstream out(path);
    out << "bad\t12\t3\n";
  }
  EXPECT_THROW(LexiconProvider::from_tsv(path), ProviderError);
  std::remove(path.c_str());
}

TEST(VaProvider, ExternalCommand) {
  EXPECT_EQ(text_to_va(ExternalProvider("cat >/dev/null; echo 3.5 6"), "hello"), (VAPoint{3.5, 6}));
  EXPECT_EQ(text_to_va(ExternalProvider("grep -c hello | sed 's/$/,9/'"), "hello"), (VAPoint{1, 9}));
  try {
    text_to_va(ExternalProvider("exit 3"), "hello");
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("external", 0), 0u);
  }
  EXPECT_THROW(text_to_va(ExternalProvider("echo 20 5"), "hello"), ProviderError);
}

TEST(VaProvider, EmptyTextRejected) {
  EXPECT_THROW(text_to_va(LexiconProvider(), "  \n"), std::invalid_argument);
  EXPECT_THROW(text_to_va(LexiconProvider(), ""), std::invalid_argument);
}

TEST(VaProvider, ParseVaRejectsBadInput) {
  EXPECT_THROW(parse_va("3"), std::invalid_argument);
  EXPECT_THROW(parse_va("3,8,1"), std::invalid_argument);
  EXPECT_THROW(parse_va("3,0"), RangeError);
  EXPECT_THROW(parse_va("0.5,4"), RangeError);
  EXPECT_EQ(parse_va(" 9 , 9 "), (VAPoint{9, 9}));
}

TEST(Features, HighArousalLowValence) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto f = va_to_features({3, 8}, rng);
    EXPECT_EQ(f.mode, Mode::kMajor);
    EXPECT_GT(f.nd, 5.0);
    EXPECT_LE(f.nd, 8.0);
    EXPECT_GT(f.nad, 0.0);
    EXPECT_LE(f.nad, 0.8);
  }
}

TEST(Features, LowArousalHighValence) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto f = va_to_features({7, 2}, rng);
    EXPECT_EQ(f.mode, Mode::kMinor);
    EXPECT_GT(f.nd, 0.0);
    EXPECT_LE(f.nd, 3.5);
    EXPECT_GT(f.nad, 1.2);
    EXPECT_LE(f.nad, 2.0);
  }
}

TEST(Features, BoundaryValenceIsMajor) {
  EXPECT_EQ(mode_for_valence(5.0), Mode::kMajor);
  EXPECT_EQ(mode_for_valence(5.0001), Mode::kMinor);
  EXPECT_EQ(mode_for_valence(5.0, true), Mode::kMinor);
  EXPECT_EQ(mode_for_valence(8.0, true), Mode::kMajor);
  EXPECT_EQ(arousal_bin(3.0), 1);
  EXPECT_EQ(arousal_bin(3.01), 2);
  EXPECT_EQ(arousal_bin(9.0), 3);
  Rng rng(1);
  EXPECT_EQ(va_to_features({5, 3}, rng).mode, Mode::kMajor);
}

TEST(Features, ArousalOutOfRange) {
  Rng rng(1);
  EXPECT_THROW(va_to_features({5, 0}, rng), RangeError);
  EXPECT_THROW(va_to_features({5, 9.5}, rng), RangeError);
  EXPECT_THROW(va_to_features({0.5, 5}, rng), RangeError);
}

TEST(Features, ModeIgnoresArousal) {
  for (double v = 1.0; v <= 9.0; v += 0.25) {
    Rng rng(3);
    const Mode expected = va_to_features({v, 1}, rng).mode;
    for (double a = 0.5; a <= 9.0; a += 0.5) EXPECT_EQ(va_to_features({v, a}, rng).mode, expected);
  }
}

TEST(MotifSynth, ParseKey) {
  EXPECT_EQ(parse_key("C4"), 60);
  EXPECT_EQ(parse_key("D4"), 62);
  EXPECT_EQ(parse_key("F#3"), 54);
  EXPECT_EQ(parse_key("Bb4"), 70);
  EXPECT_EQ(parse_key("c-1"), 0);
  EXPECT_EQ(parse_key("62"), 62);
  EXPECT_THROW(parse_key("H4"), std::invalid_argument);
  EXPECT_THROW(parse_key("C"), std::invalid_argument);
  EXPECT_THROW(parse_key("G9"), std::invalid_argument);
}

TEST(MotifSynth, ScaleAndNoteCountExamples) {
  EXPECT_EQ(scale_for(Mode::kMajor, 62), (std::array<int, 8>{62, 64, 66, 67, 69, 71, 73, 74}));
  EXPECT_EQ(scale_for(Mode::kMinor, 60), (std::array<int, 8>{60, 62, 63, 65, 67, 68, 70, 72}));
  EXPECT_EQ(note_count(2.0), 8);
  EXPECT_EQ(note_count(0.25), 2);
  EXPECT_EQ(note_count(0.1), 2);
  EXPECT_EQ(note_count(8.0), 16);
}

TEST(MotifSynth, DurationsShrinkWhenNotesCannotFit) {
  Rng rng(2);
  EXPECT_EQ(fill_durations(16, 2.0, rng), std::vector<Tick>(16, 1));
  const auto d = fill_durations(5, 2.0, rng);  // 8 ticks each would overflow; 3 each then padding
  EXPECT_EQ(std::accumulate(d.begin(), d.end(), 0), 16);
  for (Tick x : d) EXPECT_GE(x, 3);
}

TEST(MotifSynth, PropertiesOverManySamples) {
  Rng rng(12345);
  for (int i = 0; i < 10000; ++i) {
    const VAPoint va{1.0 + 8.0 * rng.uniform01(), rng.uniform_left_open(0.0, 9.0)};
    const auto f = va_to_features(va, rng);
    const int idx = arousal_bin(va.arousal);
    ASSERT_GT(f.nd, kMarginNd[idx - 1]);
    ASSERT_LE(f.nd, kMarginNd[idx]);
    ASSERT_GT(f.nad, kMarginNad[3 - idx]);
    ASSERT_LE(f.nad, kMarginNad[4 - idx]);

    const int key = 48 + static_cast<int>(rng.below(24));
    const MotifSpec spec = plan_motif(f, key, rng);
    ASSERT_GE(spec.non, 2);
    ASSERT_EQ(std::accumulate(spec.durations.begin(), spec.durations.end(), 0), symbolic::kTicksPerBar);
    const auto scale = scale_for(f.mode, key);
    for (int p : spec.pitches) ASSERT_NE(std::find(scale.begin(), scale.end(), p), scale.end());
    const auto clip = motif_clip(spec);
    ASSERT_NO_THROW(symbolic::validate(clip));
    ASSERT_EQ(clip.motif_labels.size(), 1u);
  }
}

TEST(MotifSynth, SameSeedSameMotif) {
  auto make = [](std::uint64_t seed) {
    Rng rng(seed);
    return features_to_motif(va_to_features({3, 8}, rng), 62, rng);
  };
  EXPECT_EQ(make(42), make(42));
  EXPECT_NE(make(42), make(43));
}

}  // namespace
}  // namespace melotrans::ttmm
