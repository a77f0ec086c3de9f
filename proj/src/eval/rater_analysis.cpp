#include "nvi/eval/rater_analysis.hpp"

#include <map>

#include "nvi/error.hpp"

namespace nvi::eval {
namespace {

using json = nlohmann::ordered_json;

bool in_set(data::Split split, ItemSet items) {
    switch (items) {
        case ItemSet::validation: return split == data::Split::validation;
        case ItemSet::train: return split == data::Split::train;
        case ItemSet::external: return split == data::Split::external;
        case ItemSet::all: return true;
    }
    return false;
}

}  // namespace

std::vector<IccRow> rater_replacement_table(const stats::RaterMatrix& matrix, const RaterColumns& names) {
    matrix.validate();
    if (names.raters.size() != 3) throw ValidationError("rater replacement needs exactly three rater columns");
    for (const auto& c : names.raters) matrix.column_index(c);
    matrix.column_index(names.model);

    std::vector<std::vector<std::string>> combos{names.raters};
    for (int replaced = 2; replaced >= 0; --replaced) {
        auto c = names.raters;
        c[replaced] = names.model;
        combos.push_back(c);
    }
    auto four = names.raters;
    four.push_back(names.model);
    combos.push_back(four);

    std::vector<IccRow> rows;
    for (auto& c : combos) {
        IccRow row{c, std::nullopt, {}};
        try {
            row.icc = stats::icc2k(matrix.select(c)).value;
        } catch (const UndefinedStatisticError& e) {
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ColumnCorrelation> median_fusion_correlations(const stats::RaterMatrix& matrix) {
    matrix.validate();
    if (matrix.items() < 3)
        throw ValidationError("median fusion needs at least 3 items, got " + std::to_string(matrix.items()));
    if (matrix.columns.empty()) throw ValidationError("median fusion needs at least one column");
    Eigen::VectorXd med(matrix.items());
    for (Eigen::Index i = 0; i < matrix.items(); ++i) {
        const Eigen::VectorXd row = matrix.values.row(i).transpose();
        med(i) = stats::median(std::vector<double>(row.data(), row.data() + row.size()));
    }
    std::vector<ColumnCorrelation> out;
    for (std::size_t j = 0; j < matrix.columns.size(); ++j) {
        ColumnCorrelation c{matrix.columns[j], std::nullopt, false};
        try {
            c.result = stats::pearson(matrix.values.col(static_cast<Eigen::Index>(j)), med);
        } catch (const UndefinedStatisticError&) {
            c.zero_variance = true;
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string_view to_string(ItemSet set) {
    switch (set) {
        case ItemSet::validation: return "validation";
        case ItemSet::train: return "train";
        case ItemSet::external: return "external";
        case ItemSet::all: return "all";
    }
    return "?";
}

std::optional<ItemSet> parse_item_set(std::string_view text) {
    for (auto s : {ItemSet::validation, ItemSet::train, ItemSet::external, ItemSet::all})
        if (text == to_string(s)) return s;
    return std::nullopt;
}

stats::RaterMatrix build_rater_matrix(const data::DatasetManifest& manifest,
                                      std::span<const fusion::ScoreRow> scores, ItemSet items) {
    std::map<std::string, double> score_of;
    for (const auto& s : scores) score_of[s.segment_id] = s.score;

    std::vector<std::string> ids;
    std::vector<std::array<double, 4>> rows;
    for (const auto& label : manifest.segment_labels) {
        const auto* seg = manifest.find_segment(label.segment_id);
        if (!seg || !in_set(seg->split, items)) continue;
        const auto it = score_of.find(label.segment_id);
        if (it == score_of.end()) continue;
        ids.push_back(label.segment_id);
        rows.push_back({label.rating.values[0], label.rating.values[1], label.rating.values[2], it->second});
    }
    stats::RaterMatrix m;
    m.item_ids = ids;
    m.columns = {"Rater0", "Rater1", "Rater2", "Model"};
    m.values.resize(static_cast<Eigen::Index>(rows.size()), 4);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < 4; ++j) m.values(static_cast<Eigen::Index>(i), j) = rows[i][j];
    return m;
}

stats::RaterMatrix restrict_items(const stats::RaterMatrix& matrix, const std::vector<std::string>& item_ids) {
    std::map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < matrix.item_ids.size(); ++i) row_of[matrix.item_ids[i]] = static_cast<Eigen::Index>(i);
    stats::RaterMatrix out;
    out.columns = matrix.columns;
    out.item_ids = item_ids;
    out.values.resize(static_cast<Eigen::Index>(item_ids.size()), matrix.values.cols());
    for (std::size_t i = 0; i < item_ids.size(); ++i) {
        const auto it = row_of.find(item_ids[i]);
        if (it == row_of.end()) throw ValidationError("unknown item '" + item_ids[i] + "'");
        out.values.row(static_cast<Eigen::Index>(i)) = matrix.values.row(it->second);
    }
    return out;
}

json to_json(const stats::CorrelationResult& r) { return {{"r", r.r}, {"p_raw", r.p_raw}, {"n", r.n}}; }

json to_json(const std::vector<IccRow>& table) {
    json out = json::array();
    for (const auto& row : table) {
        json j;
        j["columns"] = row.columns;
        j["icc"] = row.icc ? json(*row.icc) : json(nullptr);
        if (!row.note.empty()) j["note"] = row.note;
        out.push_back(std::move(j));
    }
    return out;
}

json to_json(const std::vector<ColumnCorrelation>& correlations) {
    json out = json::array();
    for (const auto& c : correlations) {
        json j;
        j["column"] = c.column;
        if (c.result) {
            j.update(to_json(*c.result));
        } else {
            j["r"] = nullptr;
            j["undefined"] = true;
        }
        j["zero_variance"] = c.zero_variance;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace nvi::eval
