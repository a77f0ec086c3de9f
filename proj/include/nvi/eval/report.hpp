#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nvi/eval/external.hpp"
#include "nvi/eval/rater_analysis.hpp"
#include "nvi/regress/regressor.hpp"

namespace nvi::eval {

struct Histogram {
    std::string title;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [lo, hi]; the top edge belongs to the last bin.
/// Throws ValidationError on empty input or values outside the range.
Histogram make_histogram(std::span<const double> values, double lo, double hi, int bins, std::string title);
std::string render_histogram_svg(const Histogram& h);

/// Output of the evaluate step.
struct EvaluationResults {
    std::optional<regress::RegressorEvaluation> gesture, distance, nvi;
    std::size_t gesture_n = 0, distance_n = 0, nvi_n = 0;
    std::optional<double> threshold;
    ItemSet icc_items = ItemSet::validation;
    std::vector<IccRow> icc_table;
    std::vector<ColumnCorrelation> median_fusion;
    /// Why the ICC or median-fusion analysis is missing, if it is.
    std::string icc_note;
};

nlohmann::ordered_json to_json(const regress::RegressorEvaluation& e, std::size_t n);
nlohmann::ordered_json to_json(const EvaluationResults& results);

struct ReportInputs {
    std::filesystem::path manifest;
    std::filesystem::path evaluation;
    std::optional<std::filesystem::path> external_validation;
    /// Training metrics files, one per trained model.
    std::vector<std::filesystem::path> metrics;
    /// Run configuration, recorded verbatim.
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

struct ReportBundle {
    nlohmann::ordered_json summary;
    /// File name -> content.
    std::vector<std::pair<std::string, std::string>> files;
};

/// Summary with gesture_r, distance_r, nvi_r, icc_table, median_fusion,
/// external_validation, training, counts, configs and input hashes, plus one
/// rating histogram each for gesture intensity, perceived distance and NVI.
/// Missing inputs are listed together in one ValidationError.
ReportBundle render_report(const ReportInputs& inputs);

/// summary.json plus the histogram files.
void write_report(const ReportBundle& bundle, const std::filesystem::path& dir);

/// 64-bit FNV-1a of the file contents as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace nvi::eval
