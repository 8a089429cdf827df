/**
 * @file metrics.cpp
 */

#include "melotrans/metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace melotrans::metrics {

using symbolic::Clip;
using symbolic::Tick;

TypeCounts count_variants(const std::vector<Clip>& corpus) {
  TypeCounts counts{};
  for (const auto& clip : corpus) {
    for (const auto& v : clip.variant_labels) {
      if (v.type < 1 || v.type > symbolic::kVariantTypeCount) {
        throw MetricsError("variant label of type " + std::to_string(v.type) + " outside 1..5");
      }
      ++counts[static_cast<std::size_t>(v.type - 1)];
    }
  }
  return counts;
}

Proportions proportions_from_counts(const TypeCounts& counts) {
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw MetricsError("variant counts must be non-negative");
    total += c;
  }
  if (total == 0) throw MetricsError("variant proportion is undefined for a corpus without variants");
  Proportions vp{};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    vp[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  return vp;
}

Proportions variant_proportion(const std::vector<Clip>& corpus) {
  return proportions_from_counts(count_variants(corpus));
}

std::vector<Tick> region_starts(const Clip& clip) {
  std::vector<Tick> starts;
  for (const auto& m : clip.motif_labels) starts.push_back(m.start);
  for (const auto& v : clip.variant_labels) starts.push_back(v.start);
  std::sort(starts.begin(), starts.end());
  return starts;
}

DistanceSum distance_sum(const std::vector<Clip>& corpus) {
  DistanceSum sum;
  for (const auto& clip : corpus) {
    const auto starts = region_starts(clip);
    if (starts.size() < 2) continue;
    // Gaps telescope to last - first within a clip.
    sum.beats += static_cast<double>(starts.back() - starts.front()) / symbolic::kTicksPerBeat;
    sum.pairs += static_cast<std::int64_t>(starts.size()) - 1;
  }
  return sum;
}

double variant_distance(const std::vector<Clip>& corpus) {
  const DistanceSum sum = distance_sum(corpus);
  if (sum.pairs == 0) throw MetricsError("variant distance needs a clip with at least two labelled regions");
  return sum.beats / static_cast<double>(sum.pairs);
}

CorpusStats corpus_stats(const std::vector<Clip>& corpus) {
  CorpusStats s;
  s.counts = count_variants(corpus);
  s.n_d = static_cast<std::int64_t>(corpus.size());
  const DistanceSum d = distance_sum(corpus);
  s.pair_count = d.pairs;
  if (std::any_of(s.counts.begin(), s.counts.end(), [](auto c) { return c > 0; })) {
    s.vp = proportions_from_counts(s.counts);
  }
  if (d.pairs > 0) s.vd = d.beats / static_cast<double>(d.pairs);
  return s;
}

nlohmann::json to_json(const CorpusStats& stats) {
  nlohmann::json j;
  j["n_d"] = stats.n_d;
  j["counts"] = stats.counts;
  j["pair_count"] = stats.pair_count;
  j["vp"] = stats.vp ? nlohmann::json(*stats.vp) : nlohmann::json(nullptr);
  j["vd_beats"] = stats.vd ? nlohmann::json(*stats.vd) : nlohmann::json(nullptr);
  return j;
}

std::string format_table(const CorpusStats& stats) {
  auto cell = [](const std::optional<double>& v, int precision) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s%8s%8s%8s%8s%8s%8s\n", "", "VP1", "VP2", "VP3", "VP4", "VP5", "VD");
  out << line;
  std::string row = "value   ";
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    const std::optional<double> v = stats.vp ? std::optional<double>((*stats.vp)[i]) : std::nullopt;
    std::snprintf(line, sizeof line, "%8s", cell(v, 2).c_str());
    row += line;
  }
  std::snprintf(line, sizeof line, "%8s\n", cell(stats.vd, 2).c_str());
  out << row << line;
  row = "count   ";
  for (auto c : stats.counts) {
    std::snprintf(line, sizeof line, "%8lld", static_cast<long long>(c));
    row += line;
  }
  std::snprintf(line, sizeof line, "%8lld\n", static_cast<long long>(stats.pair_count));
  out << row << line;
  out << "clips " << stats.n_d << "\n";
  return out.str();
}

}  // namespace melotrans::metrics
