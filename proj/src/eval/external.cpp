#include "nvi/eval/external.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "nvi/error.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::eval {
namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

const std::string& key_of(const fusion::ScoreRow& row, AggregationLevel level) {
    return level == AggregationLevel::teacher ? row.teacher_id : row.video_id;
}

}  // namespace

std::string_view to_string(AggregationLevel level) { return level == AggregationLevel::teacher ? "teacher" : "video"; }

std::string_view to_string(DatasetVariant variant) {
    return variant == DatasetVariant::full ? "full" : "additional-only";
}

std::optional<DatasetVariant> parse_dataset_variant(std::string_view text) {
    if (text == "full") return DatasetVariant::full;
    if (text == "additional-only") return DatasetVariant::additional_only;
    return std::nullopt;
}

bool ExternalMeasures::has(std::string_view measure) const {
    for (const auto& n : names)
        if (n == measure) return true;
    return false;
}

std::optional<double> ExternalMeasures::value(const std::string& key, std::string_view measure) const {
    const auto it = rows.find(key);
    if (it == rows.end()) return std::nullopt;
    for (std::size_t j = 0; j < names.size(); ++j)
        if (names[j] == measure) return it->second[j];
    throw ValidationError("measure '" + std::string(measure) + "' not in table");
}

ExternalMeasures read_measures_csv(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(file, 0, "cannot open measures file");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(file, 1, "empty measures file");
    auto header = split_csv(trim(line));
    for (auto& h : header) h = trim(h);
    ExternalMeasures m;
    if (header.empty() || (header[0] != "teacher_id" && header[0] != "video_id"))
        throw ParseError(file, 1, "first column must be teacher_id or video_id");
    m.level = header[0] == "teacher_id" ? AggregationLevel::teacher : AggregationLevel::video;
    m.names.assign(header.begin() + 1, header.end());
    if (m.names.empty()) throw ParseError(file, 1, "no measure columns");
    if (std::set<std::string>(m.names.begin(), m.names.end()).size() != m.names.size())
        throw ParseError(file, 1, "duplicate measure column");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size())
            throw ParseError(file, line_no,
                             "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        const std::string key = trim(cells[0]);
        if (key.empty()) throw ParseError(file, line_no, "empty key");
        if (m.rows.count(key)) throw ParseError(file, line_no, "duplicate key '" + key + "'");
        std::vector<double> values;
        for (std::size_t j = 1; j < cells.size(); ++j) {
            const std::string cell = trim(cells[j]);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (cell.empty() || used != cell.size() || !std::isfinite(v))
                throw ParseError(file, line_no, "measure '" + header[j] + "' value '" + cell + "' is not numeric");
            values.push_back(v);
        }
        m.rows.emplace(key, std::move(values));
    }
    return m;
}

void write_measures_csv(const ExternalMeasures& measures, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << (measures.level == AggregationLevel::teacher ? "teacher_id" : "video_id");
    for (const auto& n : measures.names) out << ',' << n;
    out << '\n';
    char buf[64];
    for (const auto& [key, values] : measures.rows) {
        out << key;
        for (double v : values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

std::vector<Hypothesis> default_hypotheses() {
    return {{"H1", "interest_math", AggregationLevel::teacher},
            {"H2", "cognitive_activation", AggregationLevel::teacher},
            {"H3", "perceived_enthusiasm", AggregationLevel::teacher},
            {"H4", "socio_emotional_support", AggregationLevel::video}};
}

std::map<std::string, double> aggregate_scores(std::span<const fusion::ScoreRow> scores, AggregationLevel level) {
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& r : scores) {
        auto& a = acc[key_of(r, level)];
        a.first += r.score;
        ++a.second;
    }
    std::map<std::string, double> out;
    for (const auto& [key, a] : acc) out[key] = a.first / static_cast<double>(a.second);
    return out;
}

CorrelationReport external_validation(std::span<const fusion::ScoreRow> scores,
                                      std::span<const ExternalMeasures> measures, DatasetVariant variant,
                                      const std::vector<Hypothesis>& hypotheses) {
    if (hypotheses.empty()) throw ValidationError("no hypotheses to test");
    std::vector<fusion::ScoreRow> used;
    for (const auto& r : scores)
        if (variant == DatasetVariant::full || r.split == data::Split::external) used.push_back(r);
    if (used.empty())
        throw ValidationError("no scored segments for the " + std::string(to_string(variant)) + " variant");

    CorrelationReport report;
    report.variant = variant;
    std::vector<double> p_values;
    std::vector<std::size_t> defined;
    for (const auto& h : hypotheses) {
        const ExternalMeasures* table = nullptr;
        for (const auto& m : measures)
            if (m.level == h.level && m.has(h.measure)) table = &m;
        if (!table)
            throw ValidationError(h.id + ": no " + std::string(to_string(h.level)) + "-level table with measure '" +
                                  h.measure + "'");
        const auto agg = aggregate_scores(used, h.level);
        const std::string level(to_string(h.level));
        std::vector<double> x, y;
        std::vector<std::string> only_scores, only_measures;
        for (const auto& [key, score] : agg) {
            if (auto v = table->value(key, h.measure)) {
                x.push_back(score);
                y.push_back(*v);
            } else {
                only_scores.push_back(key);
            }
        }
        for (const auto& [key, values] : table->rows)
            if (!agg.count(key)) only_measures.push_back(key);
        report.unmatched_scores[level] = only_scores;
        report.unmatched_measures[level] = only_measures;

        if (x.size() < 3)
            throw ValidationError(h.id + ": only " + std::to_string(x.size()) + " " + level +
                                  "(s) matched between scores and measures; at least 3 are needed");
        HypothesisResult res{h, std::nullopt, std::nullopt, std::nullopt, x.size(), {}};
        if (x.size() < kSmallSample)
            report.warnings.push_back(h.id + ": small sample (n=" + std::to_string(x.size()) + ")");
        try {
            const auto c = stats::pearson(x, y);
            res.r = c.r;
            res.p_raw = c.p_raw;
            p_values.push_back(c.p_raw);
            defined.push_back(report.results.size());
        } catch (const UndefinedStatisticError& e) {
            res.note = e.what();
        }
        report.results.push_back(std::move(res));
    }
    const auto adjusted = stats::fdr_adjust(p_values);
    for (std::size_t i = 0; i < defined.size(); ++i) report.results[defined[i]].p_adjusted = adjusted[i];
    return report;
}

json to_json(const CorrelationReport& report) {
    json j;
    j["variant"] = to_string(report.variant);
    j["fdr"] = "benjamini-hochberg";
    json results = json::array();
    for (const auto& r : report.results) {
        json e;
        e["hypothesis"] = r.hypothesis.id;
        e["measure"] = r.hypothesis.measure;
        e["level"] = to_string(r.hypothesis.level);
        e["r"] = r.r ? json(*r.r) : json(nullptr);
        e["p_raw"] = r.p_raw ? json(*r.p_raw) : json(nullptr);
        e["p_adjusted"] = r.p_adjusted ? json(*r.p_adjusted) : json(nullptr);
        e["n"] = r.n;
        if (!r.note.empty()) e["note"] = r.note;
        results.push_back(std::move(e));
    }
    j["results"] = std::move(results);
    j["unmatched_scores"] = report.unmatched_scores;
    j["unmatched_measures"] = report.unmatched_measures;
    j["warnings"] = report.warnings;
    return j;
}

}  // namespace nvi::eval
