#include "nvi/fusion/score_table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvi/error.hpp"

namespace nvi::fusion {
namespace {

constexpr const char* kHeader = "segment_id,teacher_id,video_id,split,score";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void write_score_table(const std::vector<ScoreRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << kHeader << '\n';
    char buf[64];
    for (const auto& r : rows) {
        for (const auto* field : {&r.segment_id, &r.teacher_id, &r.video_id})
            if (field->find_first_of(",\n") != std::string::npos)
                throw ValidationError("identifier '" + *field + "' contains a comma or newline");
        std::snprintf(buf, sizeof buf, "%.17g", r.score);
        out << r.segment_id << ',' << r.teacher_id << ',' << r.video_id << ',' << data::to_string(r.split) << ','
            << buf << '\n';
    }
}

std::vector<ScoreRow> read_score_table(const std::filesystem::path& path) {
    const std::string file = path.string();
    std::ifstream in(path);
    if (!in) throw ParseError(file, 0, "cannot open score table");
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw ParseError(file, 1, std::string("expected header '") + kHeader + "'");
    std::vector<ScoreRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 5) throw ParseError(file, line_no, "expected 5 columns, got " + std::to_string(cells.size()));
        ScoreRow r{cells[0], cells[1], cells[2], data::Split::train, 0.0};
        const auto split = data::parse_split(cells[3]);
        if (!split) throw ParseError(file, line_no, "unknown split '" + cells[3] + "'");
        r.split = *split;
        std::size_t used = 0;
        try {
            r.score = std::stod(cells[4], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != cells[4].size() || cells[4].empty() || !std::isfinite(r.score))
            throw ParseError(file, line_no, "score '" + cells[4] + "' is not a finite number");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace nvi::fusion
