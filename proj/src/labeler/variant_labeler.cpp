/**
 * @file variant_labeler.cpp
 * @brief Sliding-window variant classification.
 */

#include "melotrans/labeler/variant_labeler.hpp"

#include <algorithm>
#include <string>

namespace melotrans::labeler {
namespace {

struct Interval {
  Tick start;
  Tick end;
};

bool overlaps_any(const std::vector<Interval>& taken, Tick start, Tick end) {
  return std::any_of(taken.begin(), taken.end(), [&](const Interval& iv) { return iv.start < end && start < iv.end; });
}

// Sorted onsets are strictly increasing, so ordered containment is plain
// sorted-range inclusion.
bool proper_subset(const std::vector<Tick>& small, const std::vector<Tick>& big) {
  return small.size() < big.size() && std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<VariantLabel> scan(const Clip& clip, const MotifLabel& motif, const LabelerOptions& options,
                               std::vector<Interval> taken) {
  const Tick len = motif.end - motif.start;
  const WindowView m = make_window(clip, motif.start, len);
  if (m.st.size() < 2) {
    throw LabelError("motif at tick " + std::to_string(motif.start) + " holds " + std::to_string(m.st.size()) +
                     " note(s); at least two are required");
  }
  const std::vector<NoteEvent> motif_notes = notes_in(clip, motif.start, motif.end);
  const Tick step = options.half_bar_step ? symbolic::kTicksPerBar / 2 : symbolic::kTicksPerBar;

  std::vector<VariantLabel> out;
  for (Tick ws = motif.end; ws + len <= clip.length; ws += step) {
    if (overlaps_any(taken, ws, ws + len)) continue;
    const WindowView c = make_window(clip, ws, len);
    int type = 0;
    if (c.st == m.st) {
      type = classify(match_ratios(motif_notes, c));
    } else if (c.st.size() >= 2) {
      if (proper_subset(m.st, c.st) && is_subsequence(m.trend, c.trend)) type = 4;
      if (proper_subset(c.st, m.st) && is_subsequence(c.trend, m.trend)) type = 4;
    }
    if (type == 0) continue;
    out.push_back({type, ws, ws + len});
    taken.push_back({ws, ws + len});
  }
  return out;
}

}  // namespace

std::vector<int> pitch_trend(const std::vector<int>& pitches) {
  if (pitches.size() < 2) throw LabelError("pitch trend needs at least two pitches");
  std::vector<int> out;
  out.reserve(pitches.size() - 1);
  for (std::size_t i = 0; i + 1 < pitches.size(); ++i) {
    const int d = pitches[i + 1] - pitches[i];
    out.push_back((d > 0) - (d < 0));
  }
  return out;
}

WindowView make_window(const Clip& clip, Tick start, Tick len) {
  WindowView w;
  w.win_start = start;
  w.win_len = len;
  auto it = std::lower_bound(clip.melody.begin(), clip.melody.end(), start,
                             [](const NoteEvent& n, Tick t) { return n.start < t; });
  for (; it != clip.melody.end() && it->start < start + len; ++it) {
    w.st.push_back(it->start - start);
    w.pitch.push_back(it->pitch);
  }
  if (w.pitch.size() >= 2) w.trend = pitch_trend(w.pitch);
  return w;
}

MatchRatios match_ratios(const std::vector<NoteEvent>& motif, const WindowView& window) {
  if (motif.size() != window.pitch.size() || motif.size() < 2) {
    throw LabelError("match ratios need equal-length note lists of at least two notes (motif " +
                     std::to_string(motif.size()) + ", window " + std::to_string(window.pitch.size()) + ")");
  }
  std::vector<int> pitches;
  for (const auto& n : motif) pitches.push_back(n.pitch);
  const auto trend = pitch_trend(pitches);

  MatchRatios r;
  for (std::size_t i = 0; i < pitches.size(); ++i) r.pmr += pitches[i] == window.pitch[i];
  for (std::size_t i = 0; i < trend.size(); ++i) r.tmr += trend[i] == window.trend[i];
  r.pmr /= static_cast<double>(pitches.size());
  r.tmr /= static_cast<double>(trend.size());
  return r;
}

int classify(const MatchRatios& ratios) {
  if (ratios.tmr >= 0.6) return ratios.pmr >= 0.6 ? 1 : 2;
  if (ratios.tmr >= 0.2) return 3;
  return 5;
}

bool is_subsequence(const std::vector<int>& small, const std::vector<int>& big) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < big.size() && i < small.size(); ++j) {
    if (big[j] == small[i]) ++i;
  }
  return i == small.size();
}

std::vector<MotifLabel> detect_repetitions(const Clip& clip, const MotifLabel& motif) {
  const Tick len = motif.end - motif.start;
  const auto reference = notes_in(clip, motif.start, motif.end);
  std::vector<MotifLabel> out;
  if (reference.empty()) return out;
  for (Tick t = 0; t + len <= clip.length; ++t) {
    if (t == motif.start) continue;
    const auto candidate = notes_in(clip, t, t + len);
    if (candidate.size() != reference.size()) continue;
    bool same = true;
    for (std::size_t i = 0; same && i < reference.size(); ++i) {
      same = candidate[i].start - t == reference[i].start - motif.start &&
             candidate[i].duration == reference[i].duration && candidate[i].pitch == reference[i].pitch;
    }
    if (same) out.push_back({t, t + len, static_cast<int>(candidate.size())});
  }
  return out;
}

std::vector<VariantLabel> label_variants(const Clip& clip, const MotifLabel& motif, const LabelerOptions& options) {
  return scan(clip, motif, options, {});
}

Clip label_clip(Clip clip, const LabelerOptions& options) {
  std::vector<Interval> taken;
  for (const auto& m : clip.motif_labels) taken.push_back({m.start, m.end});
  clip.variant_labels.clear();
  for (const auto& m : clip.motif_labels) {
    for (const auto& v : scan(clip, m, options, taken)) {
      clip.variant_labels.push_back(v);
      taken.push_back({v.start, v.end});
    }
  }
  symbolic::sort_labels(clip);
  return clip;
}

}  // namespace melotrans::labeler
