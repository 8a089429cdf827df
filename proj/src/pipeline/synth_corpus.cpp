/**
 * @file synth_corpus.cpp
 */

#include "melotrans/pipeline/synth_corpus.hpp"

#include <algorithm>
#include <stdexcept>

namespace melotrans::pipeline {
namespace {

using symbolic::kTicksPerBar;
using symbolic::Tick;

int draw(ttmm::Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

int sign(int v) { return (v > 0) - (v < 0); }

std::vector<int> trends(const std::vector<MotifNote>& notes) {
  std::vector<int> out;
  for (std::size_t i = 1; i < notes.size(); ++i) out.push_back(sign(notes[i].pitch - notes[i - 1].pitch));
  return out;
}

// Distinct sorted onsets in [0, 16) with durations that never overlap.
std::vector<MotifNote> notes_at(std::vector<Tick> onsets, ttmm::Rng& rng, int lo_pitch, int hi_pitch) {
  std::sort(onsets.begin(), onsets.end());
  std::vector<MotifNote> notes;
  for (std::size_t i = 0; i < onsets.size(); ++i) {
    const Tick room = (i + 1 < onsets.size() ? onsets[i + 1] : kTicksPerBar) - onsets[i];
    notes.push_back({onsets[i], draw(rng, 1, std::min<Tick>(room, 4)), draw(rng, lo_pitch, hi_pitch)});
  }
  return notes;
}

std::vector<Tick> random_onsets(ttmm::Rng& rng, int count) {
  std::vector<Tick> onsets;
  while (static_cast<int>(onsets.size()) < count) {
    const Tick t = draw(rng, 0, kTicksPerBar - 1);
    if (std::find(onsets.begin(), onsets.end(), t) == onsets.end()) onsets.push_back(t);
  }
  std::sort(onsets.begin(), onsets.end());
  return onsets;
}

void fit_durations(std::vector<MotifNote>& notes) {
  std::sort(notes.begin(), notes.end(), [](const auto& a, const auto& b) { return a.onset < b.onset; });
  for (std::size_t i = 0; i + 1 < notes.size(); ++i) {
    notes[i].duration = std::min(notes[i].duration, notes[i + 1].onset - notes[i].onset);
  }
  if (!notes.empty()) notes.back().duration = std::min(notes.back().duration, kTicksPerBar - notes.back().onset);
}

int expected_for_ratios(double pmr, double tmr) {
  if (tmr >= 0.6) return pmr >= 0.6 ? 1 : 2;
  return tmr >= 0.2 ? 3 : 5;
}

}  // namespace

const char* transform_name(Transform t) {
  switch (t) {
    case Transform::kCopy: return "copy";
    case Transform::kTranspose: return "transpose";
    case Transform::kPerturb: return "perturb";
    case Transform::kReshape: return "reshape";
    case Transform::kInsert: return "insert";
    case Transform::kRemove: return "remove";
    case Transform::kInvert: return "invert";
    case Transform::kFree: return "free";
    case Transform::kRest: return "rest";
  }
  return "?";
}

std::vector<MotifNote> random_motif(ttmm::Rng& rng) {
  auto notes = notes_at(random_onsets(rng, draw(rng, 3, 8)), rng, 60, 72);
  for (std::size_t i = 1; i < notes.size(); ++i) {
    const int step = draw(rng, 1, 4) * (rng.below(2) == 0 ? 1 : -1);
    notes[i].pitch = std::clamp(notes[i - 1].pitch + step, 52, 80);
    if (notes[i].pitch == notes[i - 1].pitch) notes[i].pitch -= step;  // clamped onto its neighbour
  }
  return notes;
}

std::pair<std::vector<MotifNote>, int> apply_transform(const std::vector<MotifNote>& motif, Transform t,
                                                       ttmm::Rng& rng) {
  if (motif.size() < 3) throw std::invalid_argument("synthetic motifs need at least three notes");
  std::vector<MotifNote> out = motif;
  const auto n = static_cast<int>(motif.size());
  const std::vector<int> trend_m = trends(motif);
  switch (t) {
    case Transform::kCopy:
      return {out, 1};
    case Transform::kTranspose: {
      const int shift = draw(rng, 1, 7) * (rng.below(2) == 0 ? 1 : -1);
      for (auto& note : out) note.pitch += shift;
      return {out, 2};
    }
    case Transform::kPerturb: {
      int changed = 0;
      const int wanted = draw(rng, 1, 2);
      for (int attempt = 0; attempt < 64 && changed < wanted; ++attempt) {
        const auto i = static_cast<std::size_t>(draw(rng, 0, n - 1));
        if (out[i].pitch != motif[i].pitch) continue;
        const int keep = out[i].pitch;
        out[i].pitch += draw(rng, 1, 2) * (rng.below(2) == 0 ? 1 : -1);
        if (trends(out) == trend_m) {
          ++changed;
        } else {
          out[i].pitch = keep;
        }
      }
      return {out, expected_for_ratios(static_cast<double>(n - changed) / n, 1.0)};
    }
    case Transform::kReshape: {
      // Keep k of the m trend signs, k the smallest count with k/m >= 0.2.
      const int m = n - 1;
      const int keep = (m + 4) / 5;
      std::vector<int> order(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
      for (int i = m - 1; i > 0; --i) std::swap(order[static_cast<std::size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
      std::vector<int> target = trend_m;
      for (int r = keep; r < m; ++r) target[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] *= -1;
      for (std::size_t i = 1; i < out.size(); ++i) out[i].pitch = out[i - 1].pitch + target[i - 1] * draw(rng, 1, 3);
      int pmr_hits = 0;
      for (std::size_t i = 0; i < out.size(); ++i) pmr_hits += out[i].pitch == motif[i].pitch;
      return {out, expected_for_ratios(static_cast<double>(pmr_hits) / n, static_cast<double>(keep) / m)};
    }
    case Transform::kInsert: {
      std::vector<Tick> free_ticks;
      for (Tick tick = 0; tick < kTicksPerBar; ++tick) {
        if (std::none_of(motif.begin(), motif.end(), [&](const auto& x) { return x.onset == tick; })) free_ticks.push_back(tick);
      }
      const Tick at = free_ticks[rng.below(free_ticks.size())];
      out.push_back({at, 1, motif[0].pitch + draw(rng, -5, 5)});
      fit_durations(out);
      return {out, 4};
    }
    case Transform::kRemove: {
      // Interior removals keep the trend contained only when the neighbours differ.
      std::vector<int> ok{0, n - 1};
      for (int i = 1; i + 1 < n; ++i) {
        if (motif[static_cast<std::size_t>(i - 1)].pitch != motif[static_cast<std::size_t>(i + 1)].pitch) ok.push_back(i);
      }
      out.erase(out.begin() + ok[rng.below(ok.size())]);
      return {out, 4};
    }
    case Transform::kInvert:
      for (auto& note : out) note.pitch = 2 * motif[0].pitch - note.pitch;
      return {out, 5};
    case Transform::kFree: {
      std::vector<Tick> motif_onsets;
      for (const auto& note : motif) motif_onsets.push_back(note.onset);
      for (;;) {
        const auto onsets = random_onsets(rng, draw(rng, 2, 6));
        const bool sub = std::includes(motif_onsets.begin(), motif_onsets.end(), onsets.begin(), onsets.end());
        const bool super = std::includes(onsets.begin(), onsets.end(), motif_onsets.begin(), motif_onsets.end());
        if (!sub && !super) return {notes_at(onsets, rng, 55, 79), 0};
      }
    }
    case Transform::kRest:
      return {{}, 0};
  }
  throw std::logic_error("unknown transform");
}

SynthClip synth_clip(ttmm::Rng& rng, const SynthOptions& options) {
  if (options.bars < 2) throw std::invalid_argument("a synthetic clip needs at least two bars");
  const auto motif = random_motif(rng);
  SynthClip out;
  out.clip.length = options.bars * kTicksPerBar;
  for (const auto& note : motif) out.clip.melody.push_back({note.onset, note.duration, note.pitch, symbolic::kDefaultVelocity});
  out.clip.motif_labels.push_back({0, kTicksPerBar, static_cast<int>(motif.size())});

  std::vector<Transform> plan;
  if (options.cover_all_types) {
    plan = {Transform::kCopy, Transform::kTranspose, Transform::kReshape,
            rng.below(2) == 0 ? Transform::kInsert : Transform::kRemove, Transform::kInvert};
    for (std::size_t i = plan.size() - 1; i > 0; --i) std::swap(plan[i], plan[rng.below(i + 1)]);
  }
  while (static_cast<int>(plan.size()) < options.bars - 1) plan.push_back(static_cast<Transform>(rng.below(kTransformCount)));
  plan.resize(static_cast<std::size_t>(options.bars - 1));

  for (int bar = 1; bar < options.bars; ++bar) {
    const Transform t = plan[static_cast<std::size_t>(bar - 1)];
    const auto [notes, type] = apply_transform(motif, t, rng);
    const Tick base = bar * kTicksPerBar;
    for (const auto& note : notes) {
      out.clip.melody.push_back({base + note.onset, note.duration, std::clamp(note.pitch, 0, 127), symbolic::kDefaultVelocity});
    }
    out.placements.push_back({bar, t, type});
    if (type > 0) out.clip.variant_labels.push_back({type, base, base + kTicksPerBar});
  }
  return out;
}

std::vector<SynthClip> synth_corpus(int clips, std::uint64_t seed, const SynthOptions& options) {
  if (clips < 0) throw std::invalid_argument("clip count must be non-negative");
  std::vector<SynthClip> out;
  for (int i = 0; i < clips; ++i) {
    ttmm::Rng rng(seed + static_cast<std::uint64_t>(i));
    out.push_back(synth_clip(rng, options));
  }
  return out;
}

nlohmann::json placements_json(const SynthClip& clip) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : clip.placements) {
    arr.push_back({{"bar", p.bar}, {"transform", transform_name(p.transform)}, {"type", p.type}});
  }
  return arr;
}

}  // namespace melotrans::pipeline
