/**
 * @file midi.hpp
 * @brief Standard MIDI File reading and writing for labeled clips.
 *
 * Track naming convention:
 *   "melody"               monophonic melody notes
 *   "chord"                one block chord per chord event (lowest note is the root)
 *   "motif"                one note per motif label spanning [start, end)
 *   "variant_1".."variant_5"  one note per variant label of that type
 *
 * Reading accepts format 0 and 1 at any PPQ division; writing emits format 1
 * at kWritePpq. Tempo is ignored; time signatures other than 4/4 are rejected.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "melotrans/symbolic/clip.hpp"

namespace melotrans::symbolic {

inline constexpr int kWritePpq = 480;

class MidiParseError : public std::runtime_error {
 public:
  MidiParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses and quantizes a Standard MIDI File.
/// Throws MidiParseError on malformed bytes and ValidationError when the
/// content breaks a clip invariant (polyphonic melody, bad labels, non-4/4).
Clip parse_midi(std::span<const std::uint8_t> bytes);

/// Serialises a valid clip. An empty clip yields a bare header chunk.
std::vector<std::uint8_t> write_midi(const Clip& clip);

Clip read_midi_file(const std::string& path);
void write_midi_file(const std::string& path, const Clip& clip);

}  // namespace melotrans::symbolic
