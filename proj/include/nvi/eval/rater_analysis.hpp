#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvi/data/types.hpp"
#include "nvi/fusion/score_table.hpp"
#include "nvi/stats/rater_matrix.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::eval {

struct RaterColumns {
    std::vector<std::string> raters = {"Rater0", "Rater1", "Rater2"};
    std::string model = "Model";
};

struct IccRow {
    std::vector<std::string> columns;
    std::optional<double> icc;  // nullopt when undefined
    std::string note;
};

/// Five rows: all humans, then the model replacing the last, middle and first
/// rater (columns keep their positions), then all four columns.
std::vector<IccRow> rater_replacement_table(const stats::RaterMatrix& matrix, const RaterColumns& names = {});

struct ColumnCorrelation {
    std::string column;
    std::optional<stats::CorrelationResult> result;
    bool zero_variance = false;
};

/// Correlates every column with the per-item median of all columns
/// (even counts average the two middle values).
std::vector<ColumnCorrelation> median_fusion_correlations(const stats::RaterMatrix& matrix);

/// Which labelled segments enter the ICC and median-fusion analyses.
enum class ItemSet { validation, train, external, all };
std::string_view to_string(ItemSet set);
std::optional<ItemSet> parse_item_set(std::string_view text);

/// Rater0..2 from each segment's NVI rating triple plus a Model column from
/// the score table. Segments without a score are skipped.
stats::RaterMatrix build_rater_matrix(const data::DatasetManifest& manifest,
                                      std::span<const fusion::ScoreRow> scores, ItemSet items);

/// Rows restricted to `item_ids`, in that order.
stats::RaterMatrix restrict_items(const stats::RaterMatrix& matrix, const std::vector<std::string>& item_ids);

nlohmann::ordered_json to_json(const stats::CorrelationResult& r);
nlohmann::ordered_json to_json(const std::vector<IccRow>& table);
nlohmann::ordered_json to_json(const std::vector<ColumnCorrelation>& correlations);

}  // namespace nvi::eval
