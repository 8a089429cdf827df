/**
 * @file quantize.cpp
 * @brief Sixteenth-grid quantization.
 */

#include "melotrans/symbolic/quantize.hpp"

#include <algorithm>
#include <cmath>

namespace melotrans::symbolic {

namespace {

Tick round_tick(double t) { return static_cast<Tick>(std::lround(std::max(0.0, t))); }

Tick round_duration(double d) { return std::max<Tick>(1, static_cast<Tick>(std::lround(d))); }

}  // namespace

RawClip to_raw(const Clip& clip) {
  RawClip raw;
  for (const auto& n : clip.melody) raw.melody.push_back({double(n.start), double(n.duration), n.pitch, n.velocity});
  for (const auto& c : clip.chords) raw.chords.push_back({c.root, c.quality, double(c.start), double(c.duration)});
  for (const auto& m : clip.motif_labels) raw.motif_regions.push_back({double(m.start), double(m.end)});
  for (const auto& v : clip.variant_labels) raw.variant_regions[v.type - 1].push_back({double(v.start), double(v.end)});
  raw.length = clip.length;
  return raw;
}

Clip quantize_clip(const RawClip& raw) {
  Clip clip;

  std::vector<NoteEvent> notes;
  notes.reserve(raw.melody.size());
  for (const auto& n : raw.melody) {
    notes.push_back({round_tick(n.start), round_duration(n.duration), std::clamp(n.pitch, 0, 127),
                     std::clamp(n.velocity, 1, 127)});
  }
  std::stable_sort(notes.begin(), notes.end(), [](const NoteEvent& a, const NoteEvent& b) {
    return a.start != b.start ? a.start < b.start : a.pitch > b.pitch;
  });
  for (const auto& n : notes) {
    if (!clip.melody.empty() && clip.melody.back().start == n.start) continue;  // skyline: highest pitch wins
    clip.melody.push_back(n);
  }
  for (std::size_t i = 0; i + 1 < clip.melody.size(); ++i) {
    auto& cur = clip.melody[i];
    const Tick next = clip.melody[i + 1].start;
    if (cur.end() > next) cur.duration = next - cur.start;
  }

  std::vector<ChordEvent> chords;
  for (const auto& c : raw.chords) {
    chords.push_back({((c.root % 12) + 12) % 12, c.quality, round_tick(c.start), round_duration(c.duration)});
  }
  std::stable_sort(chords.begin(), chords.end(), [](const ChordEvent& a, const ChordEvent& b) { return a.start < b.start; });
  for (const auto& c : chords) {
    if (!clip.chords.empty() && clip.chords.back().start == c.start) continue;
    clip.chords.push_back(c);
  }
  for (std::size_t i = 0; i + 1 < clip.chords.size(); ++i) {
    auto& cur = clip.chords[i];
    const Tick next = clip.chords[i + 1].start;
    if (cur.end() > next) cur.duration = next - cur.start;
  }

  for (const auto& r : raw.motif_regions) {
    const Tick s = round_tick(r.start);
    const Tick e = std::max(s + 1, round_tick(r.end));
    clip.motif_labels.push_back({s, e, count_notes_in(clip, s, e)});
  }
  for (int j = 0; j < kVariantTypeCount; ++j) {
    for (const auto& r : raw.variant_regions[j]) {
      const Tick s = round_tick(r.start);
      clip.variant_labels.push_back({j + 1, s, std::max(s + 1, round_tick(r.end))});
    }
  }
  sort_labels(clip);

  clip.length = std::max(round_tick(raw.length), clip.content_end());
  return clip;
}

Clip quantize_clip(const Clip& clip) { return quantize_clip(to_raw(clip)); }

}  // namespace melotrans::symbolic
