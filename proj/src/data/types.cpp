#include "nvi/data/types.hpp"

#include <cmath>

namespace nvi::data {

std::string_view to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::external: return "external";
    }
    return "train";
}

std::string_view to_string(Construct construct) {
    switch (construct) {
        case Construct::gesture_intensity: return "gesture_intensity";
        case Construct::perceived_distance: return "perceived_distance";
        case Construct::nvi: return "nvi";
    }
    return "nvi";
}

std::optional<Split> parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "validation") return Split::validation;
    if (text == "external") return Split::external;
    return std::nullopt;
}

std::optional<Construct> parse_construct(std::string_view text) {
    if (text == "gesture_intensity") return Construct::gesture_intensity;
    if (text == "perceived_distance") return Construct::perceived_distance;
    if (text == "nvi") return Construct::nvi;
    return std::nullopt;
}

const std::optional<RatingTriple>& FrameLabelRecord::rating(Construct construct) const {
    static const std::optional<RatingTriple> none;
    switch (construct) {
        case Construct::gesture_intensity: return gesture;
        case Construct::perceived_distance: return distance;
        case Construct::nvi: return none;
    }
    return none;
}

const SegmentRecord* DatasetManifest::find_segment(std::string_view segment_id) const {
    for (const auto& s : segments)
        if (s.segment_id == segment_id) return &s;
    return nullptr;
}

int DatasetManifest::frame_count(const SegmentRecord& segment) const {
    return static_cast<int>(std::lround(segment.duration * fps));
}

}  // namespace nvi::data
