/**
 * @file metrics.hpp
 * @brief Variant Proportion and Variant Distance over labelled corpora.
 *
 * VP_i is the share of type-i variants among all variants in the corpus.
 * VD is the mean gap, in beats, between consecutive region starts (motifs
 * and variants together) pooled over every clip with at least two regions.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "melotrans/symbolic/clip.hpp"

namespace melotrans::metrics {

class MetricsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using TypeCounts = std::array<std::int64_t, symbolic::kVariantTypeCount>;
using Proportions = std::array<double, symbolic::kVariantTypeCount>;

TypeCounts count_variants(const std::vector<symbolic::Clip>& corpus);

/// Throws MetricsError when every count is zero or any is negative.
Proportions proportions_from_counts(const TypeCounts& counts);

Proportions variant_proportion(const std::vector<symbolic::Clip>& corpus);

/// Sorted start ticks of every motif and variant label in the clip.
std::vector<symbolic::Tick> region_starts(const symbolic::Clip& clip);

struct DistanceSum {
  double beats = 0.0;       ///< summed consecutive gaps
  std::int64_t pairs = 0;   ///< number of consecutive pairs
};

DistanceSum distance_sum(const std::vector<symbolic::Clip>& corpus);

/// Throws MetricsError when no clip has two or more regions.
double variant_distance(const std::vector<symbolic::Clip>& corpus);

struct CorpusStats {
  TypeCounts counts{};
  std::int64_t n_d = 0;          ///< clips in the corpus
  std::int64_t pair_count = 0;
  std::optional<Proportions> vp;  ///< empty when the corpus has no variants
  std::optional<double> vd;       ///< empty when no clip has two regions
};

/// Never throws for empty metrics; undefined values are left unset.
CorpusStats corpus_stats(const std::vector<symbolic::Clip>& corpus);

nlohmann::json to_json(const CorpusStats& stats);

/// Aligned text table: VP_1..VP_5 then VD, plus counts.
std::string format_table(const CorpusStats& stats);

}  // namespace melotrans::metrics
