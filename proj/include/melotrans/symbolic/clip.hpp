/**
 * @file clip.hpp
 * @brief Note, chord, label and clip types shared by every module.
 *
 * Time is measured in sixteenth-note ticks (4 ticks per beat, 16 per bar).
 * Only 4/4 material is represented.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace melotrans::symbolic {

using Tick = int;

inline constexpr Tick kTicksPerBeat = 4;
inline constexpr Tick kBeatsPerBar = 4;
inline constexpr Tick kTicksPerBar = kTicksPerBeat * kBeatsPerBar;
inline constexpr Tick kMaxMotifTicks = 2 * kTicksPerBar;
inline constexpr int kDefaultVelocity = 100;
inline constexpr int kVariantTypeCount = 5;

/// Thrown when a clip (or a file describing one) violates a data-model invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct NoteEvent {
  Tick start = 0;
  Tick duration = 1;
  int pitch = 60;
  int velocity = kDefaultVelocity;

  Tick end() const { return start + duration; }
  bool operator==(const NoteEvent&) const = default;
};

enum class ChordQuality : std::uint8_t {
  kMajor,
  kMinor,
  kDiminished,
  kAugmented,
  kDominant7,
  kMajor7,
  kMinor7,
  kHalfDiminished7,
  kSus2,
  kSus4,
};

inline constexpr int kChordQualityCount = 10;

/// Semitone offsets above the root for a chord quality (root included).
std::vector<int> chord_intervals(ChordQuality quality);
const char* chord_quality_name(ChordQuality quality);

struct ChordEvent {
  int root = 0;  ///< pitch class 0..11
  ChordQuality quality = ChordQuality::kMajor;
  Tick start = 0;
  Tick duration = kTicksPerBar;

  Tick end() const { return start + duration; }
  bool operator==(const ChordEvent&) const = default;
};

/// Half-open tick interval [start, end) marking a motif on the melody track.
struct MotifLabel {
  Tick start = 0;
  Tick end = 0;
  int note_count = 0;

  bool operator==(const MotifLabel&) const = default;
};

/// Half-open tick interval [start, end) marking a variant of type 1..5.
struct VariantLabel {
  int type = 1;
  Tick start = 0;
  Tick end = 0;

  bool operator==(const VariantLabel&) const = default;
};

/// A quantized monophonic melody with an optional chord track and labels.
struct Clip {
  std::vector<NoteEvent> melody;
  std::vector<ChordEvent> chords;
  std::vector<MotifLabel> motif_labels;
  std::vector<VariantLabel> variant_labels;
  /// Total span of the clip in ticks; covers every note, chord and label.
  Tick length = 0;

  bool operator==(const Clip&) const = default;

  bool empty() const {
    return melody.empty() && chords.empty() && motif_labels.empty() &&
           variant_labels.empty() && length == 0;
  }

  /// Largest end tick among notes, chords and labels.
  Tick content_end() const;
};

/// Number of melody notes whose onset lies in [start, end).
int count_notes_in(const Clip& clip, Tick start, Tick end);

/// Melody notes whose onset lies in [start, end), in time order.
std::vector<NoteEvent> notes_in(const Clip& clip, Tick start, Tick end);

/// Indices of melody notes that overlap their successor (or share its onset).
std::vector<std::size_t> overlapping_notes(const std::vector<NoteEvent>& melody);

/// Throws ValidationError describing the first violated invariant.
void validate(const Clip& clip);

std::ostream& operator<<(std::ostream& os, const NoteEvent& n);
std::ostream& operator<<(std::ostream& os, const Clip& clip);

/// Sorts labels by start (then end, then type) so equal clips compare equal.
void sort_labels(Clip& clip);

}  // namespace melotrans::symbolic
