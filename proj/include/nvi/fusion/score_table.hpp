#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nvi/data/types.hpp"

namespace nvi::fusion {

/// One predicted NVI score (rating units) per segment.
struct ScoreRow {
    std::string segment_id;
    std::string teacher_id;
    std::string video_id;
    data::Split split = data::Split::train;
    double score = 0.0;
    friend bool operator==(const ScoreRow&, const ScoreRow&) = default;
};

/// CSV with header segment_id,teacher_id,video_id,split,score.
void write_score_table(const std::vector<ScoreRow>& rows, const std::filesystem::path& path);
std::vector<ScoreRow> read_score_table(const std::filesystem::path& path);

}  // namespace nvi::fusion
