#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvi/fusion/score_table.hpp"

namespace nvi::eval {

enum class AggregationLevel { teacher, video };
enum class DatasetVariant { full, additional_only };

std::string_view to_string(AggregationLevel level);
std::string_view to_string(DatasetVariant variant);
std::optional<DatasetVariant> parse_dataset_variant(std::string_view text);

/// Numeric measures keyed by teacher_id or video_id.
struct ExternalMeasures {
    AggregationLevel level = AggregationLevel::teacher;
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> rows;  // key -> values in `names` order

    std::optional<double> value(const std::string& key, std::string_view measure) const;
    bool has(std::string_view measure) const;
};

/// CSV whose first header cell is teacher_id or video_id and whose other
/// columns are numeric. Throws ParseError for malformed cells or duplicate keys.
ExternalMeasures read_measures_csv(const std::filesystem::path& path);
void write_measures_csv(const ExternalMeasures& measures, const std::filesystem::path& path);

struct Hypothesis {
    std::string id;
    std::string measure;
    AggregationLevel level;
};

/// H1 interest_math, H2 cognitive_activation, H3 perceived_enthusiasm at
/// teacher level; H4 socio_emotional_support at video level.
std::vector<Hypothesis> default_hypotheses();

struct HypothesisResult {
    Hypothesis hypothesis;
    std::optional<double> r;
    std::optional<double> p_raw;
    std::optional<double> p_adjusted;
    std::size_t n = 0;
    std::string note;
};

struct CorrelationReport {
    DatasetVariant variant = DatasetVariant::full;
    std::vector<HypothesisResult> results;
    /// Keys present on one side of a join only, per level.
    std::map<std::string, std::vector<std::string>> unmatched_scores;
    std::map<std::string, std::vector<std::string>> unmatched_measures;
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kSmallSample = 10;

/// Mean segment score per teacher_id or video_id.
std::map<std::string, double> aggregate_scores(std::span<const fusion::ScoreRow> scores, AggregationLevel level);

/// Correlates aggregated scores with each hypothesis' measure and adjusts the
/// family's p-values (Benjamini-Hochberg). `full` uses every scored segment,
/// `additional_only` only the external split. Each hypothesis needs at least
/// 3 matched units; fewer than kSmallSample adds a warning.
CorrelationReport external_validation(std::span<const fusion::ScoreRow> scores,
                                      std::span<const ExternalMeasures> measures, DatasetVariant variant,
                                      const std::vector<Hypothesis>& hypotheses = default_hypotheses());

nlohmann::ordered_json to_json(const CorrelationReport& report);

}  // namespace nvi::eval
