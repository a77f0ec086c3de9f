#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvi::data {

enum class Split { train, validation, external };

enum class Construct { gesture_intensity, perceived_distance, nvi };

std::string_view to_string(Split split);
std::string_view to_string(Construct construct);
std::optional<Split> parse_split(std::string_view text);
std::optional<Construct> parse_construct(std::string_view text);

/// Pixel-space rectangle; x/y is the top-left corner.
struct BoundingBox {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    int area() const { return width > 0 && height > 0 ? width * height : 0; }
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One clip of classroom video.
struct SegmentRecord {
    std::string segment_id;
    std::string teacher_id;
    std::string video_id;
    double start = 0.0;      // seconds
    double duration = 30.0;  // seconds
    std::string source_path;
    Split split = Split::train;
    /// Manually identified teacher region in the first frame.
    std::optional<BoundingBox> teacher_box;

    friend bool operator==(const SegmentRecord&, const SegmentRecord&) = default;
};

/// Three trained-rater values for one item on one construct.
struct RatingTriple {
    std::string item_id;
    Construct construct = Construct::nvi;
    std::array<double, 3> values{};
    std::array<std::string, 3> rater_ids{};

    friend bool operator==(const RatingTriple&, const RatingTriple&) = default;
};

/// Frame-level ratings for the gesture and distance regressors.
struct FrameLabelRecord {
    std::string frame_id;
    std::string segment_id;
    int frame_index = 0;
    std::optional<RatingTriple> gesture;
    std::optional<RatingTriple> distance;

    const std::optional<RatingTriple>& rating(Construct construct) const;
    friend bool operator==(const FrameLabelRecord&, const FrameLabelRecord&) = default;
};

/// Segment-level NVI ratings. `low_quality` marks samples to leave out of
/// NVI training (validation always keeps them).
struct SegmentLabelRecord {
    std::string segment_id;
    RatingTriple rating;
    bool low_quality = false;

    friend bool operator==(const SegmentLabelRecord&, const SegmentLabelRecord&) = default;
};

struct DatasetManifest {
    double scale_max = 10000.0;
    double fps = 25.0;
    double segment_duration = 30.0;
    std::vector<SegmentRecord> segments;
    std::vector<FrameLabelRecord> frame_labels;
    std::vector<SegmentLabelRecord> segment_labels;

    const SegmentRecord* find_segment(std::string_view segment_id) const;
    /// Number of frames a segment spans at the manifest frame rate.
    int frame_count(const SegmentRecord& segment) const;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

}  // namespace nvi::data
