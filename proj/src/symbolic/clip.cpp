/**
 * @file clip.cpp
 * @brief Clip invariants and small queries.
 */

#include "melotrans/symbolic/clip.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <tuple>

namespace melotrans::symbolic {

std::vector<int> chord_intervals(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::kMajor: return {0, 4, 7};
    case ChordQuality::kMinor: return {0, 3, 7};
    case ChordQuality::kDiminished: return {0, 3, 6};
    case ChordQuality::kAugmented: return {0, 4, 8};
    case ChordQuality::kDominant7: return {0, 4, 7, 10};
    case ChordQuality::kMajor7: return {0, 4, 7, 11};
    case ChordQuality::kMinor7: return {0, 3, 7, 10};
    case ChordQuality::kHalfDiminished7: return {0, 3, 6, 10};
    case ChordQuality::kSus2: return {0, 2, 7};
    case ChordQuality::kSus4: return {0, 5, 7};
  }
  return {0};
}

const char* chord_quality_name(ChordQuality quality) {
  switch (quality) {
    case ChordQuality::kMajor: return "maj";
    case ChordQuality::kMinor: return "min";
    case ChordQuality::kDiminished: return "dim";
    case ChordQuality::kAugmented: return "aug";
    case ChordQuality::kDominant7: return "7";
    case ChordQuality::kMajor7: return "maj7";
    case ChordQuality::kMinor7: return "min7";
    case ChordQuality::kHalfDiminished7: return "m7b5";
    case ChordQuality::kSus2: return "sus2";
    case ChordQuality::kSus4: return "sus4";
  }
  return "?";
}

Tick Clip::content_end() const {
  Tick end = 0;
  for (const auto& n : melody) end = std::max(end, n.end());
  for (const auto& c : chords) end = std::max(end, c.end());
  for (const auto& m : motif_labels) end = std::max(end, m.end);
  for (const auto& v : variant_labels) end = std::max(end, v.end);
  return end;
}

int count_notes_in(const Clip& clip, Tick start, Tick end) {
  return static_cast<int>(std::count_if(clip.melody.begin(), clip.melody.end(), [&](const NoteEvent& n) {
    return n.start >= start && n.start < end;
  }));
}

std::vector<NoteEvent> notes_in(const Clip& clip, Tick start, Tick end) {
  std::vector<NoteEvent> out;
  for (const auto& n : clip.melody) {
    if (n.start >= start && n.start < end) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> overlapping_notes(const std::vector<NoteEvent>& melody) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < melody.size(); ++i) {
    if (melody[i].end() > melody[i + 1].start || melody[i].start == melody[i + 1].start) out.push_back(i);
  }
  return out;
}

void validate(const Clip& clip) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (clip.length < 0) fail("clip length is negative");

  for (std::size_t i = 0; i < clip.melody.size(); ++i) {
    const auto& n = clip.melody[i];
    std::ostringstream where;
    where << "melody note " << i << " (start " << n.start << ", pitch " << n.pitch << ")";
    if (n.start < 0) fail(where.str() + ": negative start");
    if (n.duration < 1) fail(where.str() + ": duration below one tick");
    if (n.pitch < 0 || n.pitch > 127) fail(where.str() + ": pitch outside 0..127");
    if (n.velocity < 1 || n.velocity > 127) fail(where.str() + ": velocity outside 1..127");
    if (i > 0 && n.start < clip.melody[i - 1].start) fail(where.str() + ": notes not sorted by start");
  }
  if (auto bad = overlapping_notes(clip.melody); !bad.empty()) {
    std::ostringstream msg;
    msg << "melody is not monophonic; overlapping notes at";
    for (auto i : bad) {
      msg << " [" << i << ": start " << clip.melody[i].start << " end " << clip.melody[i].end() << " vs next start "
          << clip.melody[i + 1].start << "]";
    }
    fail(msg.str());
  }

  for (std::size_t i = 0; i < clip.chords.size(); ++i) {
    const auto& c = clip.chords[i];
    if (c.root < 0 || c.root > 11) fail("chord " + std::to_string(i) + ": root outside 0..11");
    if (c.start < 0 || c.duration < 1) fail("chord " + std::to_string(i) + ": bad timing");
    if (i > 0 && c.start < clip.chords[i - 1].end()) fail("chord " + std::to_string(i) + ": overlaps previous chord");
  }

  for (std::size_t i = 0; i < clip.motif_labels.size(); ++i) {
    const auto& m = clip.motif_labels[i];
    const std::string where = "motif label " + std::to_string(i);
    if (m.start < 0 || m.end <= m.start) fail(where + ": empty or inverted interval");
    if (m.end - m.start > kMaxMotifTicks) fail(where + ": longer than two bars");
    if (m.end > clip.length) fail(where + ": extends past clip end");
    const int covered = count_notes_in(clip, m.start, m.end);
    if (covered < 2) fail(where + ": covers fewer than two melody notes");
    if (covered != m.note_count) fail(where + ": note_count does not match covered notes");
  }
  for (std::size_t i = 0; i < clip.variant_labels.size(); ++i) {
    const auto& v = clip.variant_labels[i];
    const std::string where = "variant label " + std::to_string(i);
    if (v.type < 1 || v.type > kVariantTypeCount) fail(where + ": type outside 1..5");
    if (v.start < 0 || v.end <= v.start) fail(where + ": empty or inverted interval");
    if (v.end > clip.length) fail(where + ": extends past clip end");
  }
  if (clip.content_end() > clip.length) fail("clip content extends past clip length");
}

std::ostream& operator<<(std::ostream& os, const NoteEvent& n) {
  return os << "{" << n.start << "+" << n.duration << " p" << n.pitch << " v" << n.velocity << "}";
}

std::ostream& operator<<(std::ostream& os, const Clip& clip) {
  os << "Clip(length " << clip.length << ", melody [";
  for (const auto& n : clip.melody) os << n;
  os << "], chords [";
  for (const auto& c : clip.chords) os << "{" << c.root << chord_quality_name(c.quality) << " " << c.start << "+" << c.duration << "}";
  os << "], motifs [";
  for (const auto& m : clip.motif_labels) os << "{" << m.start << "," << m.end << " n" << m.note_count << "}";
  os << "], variants [";
  for (const auto& v : clip.variant_labels) os << "{t" << v.type << " " << v.start << "," << v.end << "}";
  return os << "])";
}

void sort_labels(Clip& clip) {
  std::sort(clip.motif_labels.begin(), clip.motif_labels.end(), [](const MotifLabel& a, const MotifLabel& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  std::sort(clip.variant_labels.begin(), clip.variant_labels.end(), [](const VariantLabel& a, const VariantLabel& b) {
    return std::tie(a.start, a.end, a.type) < std::tie(b.start, b.end, b.type);
  });
}

}  // namespace melotrans::symbolic
