/**
 * @file motif_synth.cpp
 */

#include "melotrans/ttmm/motif_synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace melotrans::ttmm {

int parse_key(const std::string& text) {
  auto fail = [&] { return std::invalid_argument("bad key \"" + text + "\" (expected e.g. C4, F#3, Bb4 or 62)"); };
  if (text.empty()) throw fail();
  int midi = 0;
  if (std::isdigit(static_cast<unsigned char>(text[0]))) {
    std::size_t used = 0;
    try {
      midi = std::stoi(text, &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (used != text.size()) throw fail();
  } else {
    static constexpr int kPitchClass[] = {9, 11, 0, 2, 4, 5, 7};  // A..G
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
    if (letter < 'A' || letter > 'G') throw fail();
    int pc = kPitchClass[letter - 'A'];
    std::size_t i = 1;
    if (i < text.size() && (text[i] == '#' || text[i] == 'b')) pc += text[i++] == '#' ? 1 : -1;
    if (i == text.size()) throw fail();
    std::size_t used = 0;
    int octave = 0;
    try {
      octave = std::stoi(text.substr(i), &used);
    } catch (const std::exception&) {
      throw fail();
    }
    if (i + used != text.size()) throw fail();
    midi = 12 * (octave + 1) + pc;
  }
  if (midi < 0 || midi + 12 > 127) throw std::invalid_argument("key \"" + text + "\" leaves no room for a scale in 0..127");
  return midi;
}

std::array<int, 8> scale_for(Mode mode, int key) {
  std::array<int, 8> scale = mode == Mode::kMajor ? kMajorOffsets : kMinorOffsets;
  for (auto& p : scale) p += key;
  return scale;
}

int note_count(double nd) {
  const long n = std::lround(nd * symbolic::kBeatsPerBar);
  return static_cast<int>(std::clamp<long>(n, 2, kMaxMotifNotes));
}

std::vector<Tick> fill_durations(int non, double nad, Rng& rng) {
  const Tick bar = symbolic::kTicksPerBar;
  Tick d0 = std::max<Tick>(1, static_cast<Tick>(std::lround(nad * symbolic::kTicksPerBeat)));
  if (non * d0 > bar) d0 = bar / non;  // long notes cannot all fit; shrink evenly first
  std::vector<Tick> durations(static_cast<std::size_t>(non), d0);
  Tick total = non * d0;
  while (total < bar) {
    const auto i = rng.below(static_cast<std::uint64_t>(non));
    const Tick add = std::min<Tick>(2, bar - total);
    durations[i] += add;
    total += add;
  }
  return durations;
}

MotifSpec plan_motif(const MusicalFeatures& features, int key, Rng& rng) {
  MotifSpec spec;
  spec.key = key;
  spec.non = note_count(features.nd);
  spec.scale = scale_for(features.mode, key);
  for (int i = 0; i < spec.non; ++i) spec.pitches.push_back(spec.scale[rng.below(spec.scale.size())]);
  spec.durations = fill_durations(spec.non, features.nad, rng);
  return spec;
}

symbolic::Clip motif_clip(const MotifSpec& spec) {
  symbolic::Clip clip;
  Tick t = 0;
  for (std::size_t i = 0; i < spec.pitches.size(); ++i) {
    clip.melody.push_back({t, spec.durations[i], spec.pitches[i], symbolic::kDefaultVelocity});
    t += spec.durations[i];
  }
  clip.length = symbolic::kTicksPerBar;
  clip.motif_labels.push_back({0, clip.length, static_cast<int>(clip.melody.size())});
  return clip;
}

symbolic::Clip features_to_motif(const MusicalFeatures& features, int key, Rng& rng) {
  return motif_clip(plan_motif(features, key, rng));
}

}  // namespace melotrans::ttmm
