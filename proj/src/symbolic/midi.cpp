/**
 * @file midi.cpp
 * @brief SMF chunk parsing, label-track conventions and format 1 writer.
 */

#include "melotrans/symbolic/midi.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "melotrans/symbolic/quantize.hpp"

namespace melotrans::symbolic {

namespace {

struct TrackNote {
  std::int64_t on = 0;
  std::int64_t off = 0;
  int pitch = 0;
  int velocity = 0;
};

struct Track {
  std::string name;
  std::vector<TrackNote> notes;
  std::int64_t end = 0;  // pulse of End of Track
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= bytes_.size(); }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t be(int n) {
    need(static_cast<std::size_t>(n));
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::uint32_t vlq() {
    const std::size_t at = pos_;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw MidiParseError("variable-length quantity longer than four bytes", at);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::uint8_t peek() const {
    if (done()) throw MidiParseError("unexpected end of data", pos_);
    return bytes_[pos_];
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw MidiParseError("unexpected end of data", pos_);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string lower_trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Track read_track(Reader& r, std::size_t chunk_end) {
  Track track;
  std::int64_t now = 0;
  std::uint8_t running = 0;
  // Pending note-ons per (channel, pitch), matched first-in first-out.
  std::map<std::pair<int, int>, std::vector<TrackNote>> open;
  bool ended = false;

  while (r.pos() < chunk_end && !ended) {
    now += r.vlq();
    const std::size_t at = r.pos();
    std::uint8_t status = r.peek();
    if (status & 0x80) {
      r.u8();
    } else {
      if (running == 0) throw MidiParseError("data byte without running status", at);
      status = running;
    }

    if (status == 0xFF) {
      const std::uint8_t type = r.u8();
      const std::uint32_t len = r.vlq();
      if (type == 0x03) {
        track.name = r.str(len);
      } else if (type == 0x58) {
        if (len < 2) throw MidiParseError("short time signature event", at);
        const std::uint8_t num = r.u8();
        const std::uint8_t den = r.u8();
        r.skip(len - 2);
        if (num != 4 || den != 2) {
          throw ValidationError("unsupported time signature " + std::to_string(num) + "/" +
                                std::to_string(1 << std::min<int>(den, 30)) + "; only 4/4 is supported");
        }
      } else if (type == 0x2F) {
        r.skip(len);
        ended = true;
      } else {
        r.skip(len);
      }
      running = 0;
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      r.skip(r.vlq());
      running = 0;
      continue;
    }
    if (status >= 0xF0) throw MidiParseError("unexpected system message in track", at);

    running = status;
    const int kind = status & 0xF0;
    const int channel = status & 0x0F;
    const int data_len = (kind == 0xC0 || kind == 0xD0) ? 1 : 2;
    std::array<int, 2> data{0, 0};
    for (int i = 0; i < data_len; ++i) {
      const std::uint8_t b = r.u8();
      if (b & 0x80) throw MidiParseError("status byte where data byte expected", r.pos() - 1);
      data[i] = b;
    }

    const bool note_on = kind == 0x90 && data[1] > 0;
    const bool note_off = kind == 0x80 || (kind == 0x90 && data[1] == 0);
    if (note_on) {
      open[{channel, data[0]}].push_back({now, now, data[0], data[1]});
    } else if (note_off) {
      auto it = open.find({channel, data[0]});
      if (it != open.end() && !it->second.empty()) {
        TrackNote n = it->second.front();
        it->second.erase(it->second.begin());
        n.off = now;
        track.notes.push_back(n);
      }
    }
  }
  if (!ended) throw MidiParseError("track chunk without End of Track", r.pos());
  if (r.pos() != chunk_end) throw MidiParseError("End of Track before chunk end", r.pos());

  track.end = now;
  for (auto& [key, pending] : open) {
    for (auto n : pending) {
      n.off = now;  // unterminated notes end with the track
      track.notes.push_back(n);
    }
  }
  std::stable_sort(track.notes.begin(), track.notes.end(), [](const TrackNote& a, const TrackNote& b) {
    return a.on != b.on ? a.on < b.on : a.pitch < b.pitch;
  });
  return track;
}

ChordQuality classify_chord(const std::set<int>& intervals) {
  for (int q = 0; q < kChordQualityCount; ++q) {
    const auto quality = static_cast<ChordQuality>(q);
    const auto iv = chord_intervals(quality);
    if (std::set<int>(iv.begin(), iv.end()) == intervals) return quality;
  }
  return intervals.count(3) ? ChordQuality::kMinor : ChordQuality::kMajor;
}

void check_monophonic(const std::vector<RawNote>& melody) {
  std::ostringstream msg;
  int bad = 0;
  for (std::size_t i = 0; i + 1 < melody.size(); ++i) {
    const auto& a = melody[i];
    const auto& b = melody[i + 1];
    const bool same_onset = std::lround(a.start) == std::lround(b.start);
    const bool overlap = a.start + a.duration - b.start > 0.5;
    if (same_onset || overlap) {
      msg << " [pitch " << a.pitch << " at tick " << a.start << " overlaps pitch " << b.pitch << " at tick " << b.start
          << "]";
      ++bad;
    }
  }
  if (bad > 0) throw ValidationError("melody track is polyphonic;" + msg.str());
}

// --- writer ---------------------------------------------------------------

void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::array<std::uint8_t, 5> buf{};
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

struct OutEvent {
  std::int64_t time;
  int order;  // note-offs sort before note-ons at equal time
  std::vector<std::uint8_t> bytes;
};

class TrackWriter {
 public:
  explicit TrackWriter(const std::string& name) {
    meta(0, 0x03, std::vector<std::uint8_t>(name.begin(), name.end()));
  }

  void meta(std::int64_t t, std::uint8_t type, const std::vector<std::uint8_t>& payload) {
    std::vector<std::uint8_t> b{0xFF, type};
    put_vlq(b, static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    events_.push_back({t, 0, std::move(b)});
  }

  void note(Tick start, Tick duration, int channel, int pitch, int velocity) {
    const auto on = static_cast<std::int64_t>(start) * kWritePpq / kTicksPerBeat;
    const auto off = static_cast<std::int64_t>(start + duration) * kWritePpq / kTicksPerBeat;
    events_.push_back({on, 2, {static_cast<std::uint8_t>(0x90 | channel), static_cast<std::uint8_t>(pitch),
                               static_cast<std::uint8_t>(velocity)}});
    events_.push_back({off, 1, {static_cast<std::uint8_t>(0x80 | channel), static_cast<std::uint8_t>(pitch), 0}});
  }

  void emit(std::vector<std::uint8_t>& out, Tick length) {
    std::stable_sort(events_.begin(), events_.end(), [](const OutEvent& a, const OutEvent& b) {
      return a.time != b.time ? a.time < b.time : a.order < b.order;
    });
    std::vector<std::uint8_t> body;
    std::int64_t now = 0;
    for (const auto& e : events_) {
      put_vlq(body, static_cast<std::uint32_t>(e.time - now));
      now = e.time;
      body.insert(body.end(), e.bytes.begin(), e.bytes.end());
    }
    const std::int64_t end = std::max<std::int64_t>(now, static_cast<std::int64_t>(length) * kWritePpq / kTicksPerBeat);
    put_vlq(body, static_cast<std::uint32_t>(end - now));
    body.insert(body.end(), {0xFF, 0x2F, 0x00});

    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_be(out, static_cast<std::uint32_t>(body.size()), 4);
    out.insert(out.end(), body.begin(), body.end());
  }

 private:
  std::vector<OutEvent> events_;
};

constexpr int kChordBase = 48;
constexpr int kLabelPitch = 60;

// Overlapping regions on one label track get distinct pitches so that note-off
// pairing on re-read cannot swap their ends.
std::vector<int> label_lanes(const std::vector<std::pair<Tick, Tick>>& regions) {
  std::vector<Tick> lane_end;
  std::vector<int> lanes;
  for (const auto& [start, end] : regions) {
    std::size_t lane = 0;
    while (lane < lane_end.size() && lane_end[lane] > start) ++lane;
    if (lane == lane_end.size()) lane_end.push_back(0);
    lane_end[lane] = end;
    lanes.push_back(static_cast<int>(lane));
  }
  return lanes;
}

}  // namespace

Clip parse_midi(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < 14 || r.str(4) != "MThd") throw MidiParseError("missing MThd header", 0);
  const std::uint32_t header_len = r.be(4);
  if (header_len < 6) throw MidiParseError("MThd chunk shorter than six bytes", 4);
  const std::uint32_t format = r.be(2);
  const std::uint32_t ntracks = r.be(2);
  const std::size_t division_at = r.pos();
  const std::uint32_t division = r.be(2);
  r.skip(header_len - 6);
  if (format > 1) throw MidiParseError("unsupported SMF format " + std::to_string(format), 8);
  if (division & 0x8000) throw MidiParseError("SMPTE time division is not supported", division_at);
  if (division == 0) throw MidiParseError("zero ticks-per-quarter division", division_at);

  std::vector<Track> tracks;
  while (tracks.size() < ntracks) {
    const std::size_t at = r.pos();
    const std::string id = r.str(4);
    const std::uint32_t len = r.be(4);
    if (r.pos() + len > bytes.size()) throw MidiParseError("chunk length runs past end of file", at + 4);
    if (id != "MTrk") {
      r.skip(len);  // unknown chunks are skipped
      continue;
    }
    tracks.push_back(read_track(r, r.pos() + len));
  }

  const double scale = double(kTicksPerBeat) / double(division);
  auto ticks = [&](std::int64_t pulses) { return double(pulses) * scale; };

  RawClip raw;
  const Track* melody = nullptr;
  const Track* chord = nullptr;
  std::int64_t end_pulse = 0;
  for (const auto& t : tracks) {
    end_pulse = std::max(end_pulse, t.end);
    const std::string name = lower_trim(t.name);
    if (name == "melody") {
      melody = &t;
    } else if (name == "chord") {
      chord = &t;
    } else if (name == "motif") {
      for (const auto& n : t.notes) raw.motif_regions.push_back({ticks(n.on), ticks(n.off)});
    } else if (name.rfind("variant_", 0) == 0 && name.size() == 9 && name[8] >= '1' && name[8] <= '5') {
      for (const auto& n : t.notes) raw.variant_regions[name[8] - '1'].push_back({ticks(n.on), ticks(n.off)});
    }
  }
  if (melody == nullptr) {
    // Fall back to the first unnamed (or unrecognised) track holding notes.
    for (const auto& t : tracks) {
      const std::string name = lower_trim(t.name);
      const bool reserved = name == "chord" || name == "motif" || name.rfind("variant_", 0) == 0;
      if (!reserved && !t.notes.empty()) {
        melody = &t;
        break;
      }
    }
  }

  if (melody != nullptr) {
    for (const auto& n : melody->notes) {
      raw.melody.push_back({ticks(n.on), ticks(n.off) - ticks(n.on), n.pitch, std::max(1, n.velocity)});
    }
    check_monophonic(raw.melody);
  }
  if (chord != nullptr) {
    std::size_t i = 0;
    const auto& notes = chord->notes;
    while (i < notes.size()) {
      std::size_t k = i;
      int lowest = 127;
      std::int64_t off = notes[i].off;
      while (k < notes.size() && notes[k].on == notes[i].on) {
        lowest = std::min(lowest, notes[k].pitch);
        off = std::max(off, notes[k].off);
        ++k;
      }
      std::set<int> intervals;
      for (std::size_t m = i; m < k; ++m) intervals.insert((notes[m].pitch - lowest) % 12);
      raw.chords.push_back({lowest % 12, classify_chord(intervals), ticks(notes[i].on), ticks(off) - ticks(notes[i].on)});
      i = k;
    }
  }
  raw.length = ticks(end_pulse);

  Clip clip = quantize_clip(raw);
  validate(clip);
  return clip;
}

std::vector<std::uint8_t> write_midi(const Clip& clip) {
  validate(clip);
  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  put_be(out, 6, 4);
  put_be(out, 1, 2);

  if (clip.empty()) {
    put_be(out, 0, 2);
    put_be(out, kWritePpq, 2);
    return out;
  }

  std::vector<TrackWriter> tracks;
  TrackWriter melody("melody");
  melody.meta(0, 0x58, {4, 2, 24, 8});
  melody.meta(0, 0x51, {0x07, 0xA1, 0x20});  // 120 bpm
  for (const auto& n : clip.melody) melody.note(n.start, n.duration, 0, n.pitch, n.velocity);
  tracks.push_back(std::move(melody));

  if (!clip.chords.empty()) {
    TrackWriter chord("chord");
    for (const auto& c : clip.chords) {
      for (int iv : chord_intervals(c.quality)) chord.note(c.start, c.duration, 1, kChordBase + c.root + iv, 80);
    }
    tracks.push_back(std::move(chord));
  }
  auto label_track = [&](const std::string& name, int channel, const std::vector<std::pair<Tick, Tick>>& regions) {
    if (regions.empty()) return;
    TrackWriter track(name);
    const auto lanes = label_lanes(regions);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const auto [start, end] = regions[i];
      track.note(start, end - start, channel, kLabelPitch + lanes[i], kDefaultVelocity);
    }
    tracks.push_back(std::move(track));
  };
  std::vector<std::pair<Tick, Tick>> regions;
  for (const auto& m : clip.motif_labels) regions.emplace_back(m.start, m.end);
  label_track("motif", 2, regions);
  for (int j = 1; j <= kVariantTypeCount; ++j) {
    regions.clear();
    for (const auto& v : clip.variant_labels) {
      if (v.type == j) regions.emplace_back(v.start, v.end);
    }
    label_track("variant_" + std::to_string(j), 2 + j, regions);
  }

  put_be(out, static_cast<std::uint32_t>(tracks.size()), 2);
  put_be(out, kWritePpq, 2);
  for (auto& t : tracks) t.emit(out, clip.length);
  return out;
}

Clip read_midi_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open MIDI file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_midi(bytes);
}

void write_midi_file(const std::string& path, const Clip& clip) {
  const auto bytes = write_midi(clip);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write MIDI file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace melotrans::symbolic
