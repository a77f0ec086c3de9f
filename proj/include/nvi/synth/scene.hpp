#pragma once
// Blob-rendered classroom scenes with exact ground truth.
//
// Coordinates are fractions of the frame height (x as well, so shapes keep
// their proportions on non-square frames). Objects stand on a floor whose
// depth falls linearly from the top of the frame to the bottom; an object's
// depth is the floor depth at its base row, and objects are painted far to
// near.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nvi/perception/types.hpp"
#include "nvi/perception/video.hpp"

namespace nvi::synth {

using perception::Emotion;

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned rectangle, top-left corner plus size.
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct DepthLaw {
    double top = 0.95;
    double bottom = 0.30;
    double at(double y_fraction) const { return top + (bottom - top) * y_fraction; }
    friend bool operator==(const DepthLaw&, const DepthLaw&) = default;
};

struct SceneParams {
    std::uint64_t seed = 0;
    int n_frames = 0;
    int width = 120;
    int height = 120;
    double fps = 1.0;
    /// Teacher's feet (torso centre x, base y), per frame.
    std::vector<Point> teacher_path;
    std::vector<double> arm_spread;
    /// nullopt: the teacher's face is not visible in that frame.
    std::vector<std::optional<Emotion>> emotion_tag;
    /// Students' feet positions; students are seen from behind.
    std::vector<Point> students;
    std::vector<Rect> desks;
    DepthLaw depth;

    /// Throws ValidationError on inconsistent lengths or out-of-range values.
    void validate() const;
    friend bool operator==(const SceneParams&, const SceneParams&) = default;
};

nlohmann::ordered_json to_json(const SceneParams& params);
SceneParams scene_from_json(const nlohmann::ordered_json& node);
void save_scene(const SceneParams& params, const std::filesystem::path& path);
SceneParams load_scene(const std::filesystem::path& path);

/// Labels on the normalised [0, 1] scale.
struct FrameTruth {
    double gesture = 0.0;
    double distance = 0.0;
    std::optional<Emotion> emotion;
    friend bool operator==(const FrameTruth&, const FrameTruth&) = default;
};

double gesture_label(double arm_spread);
/// `gap` is the teacher to nearest-student distance in frame heights.
double distance_label(double gap, bool desk_between);

FrameTruth frame_truth(const SceneParams& params, int frame);

struct RenderedFrame {
    Image rgb;
    perception::MaskPair masks;
    DepthMap depth;  // raw floor-law depth
    FrameTruth truth;
};

RenderedFrame render_frame(const SceneParams& params, int frame);

struct Scene {
    std::vector<Image> frames;
    std::vector<perception::MaskPair> masks;
    std::vector<DepthMap> depth;
    std::vector<FrameTruth> truth;
};

Scene generate_scene(const SceneParams& params);

/// Tight box around the teacher in frame 0, for tracker initialisation.
BoundingBox initial_teacher_box(const SceneParams& params);

struct RandomSceneOptions {
    int n_frames = 30;
    int width = 120;
    int height = 120;
    double fps = 1.0;
    /// Probability of a scene with no students at all.
    double empty_class_probability = 0.05;
    double desk_probability = 0.6;
    double face_hidden_probability = 0.15;
};

SceneParams random_scene(std::uint64_t seed, const RandomSceneOptions& options = {});

/// Streams frames of a scene description; used as a video decoder.
class SceneVideoSource final : public perception::VideoSource {
public:
    explicit SceneVideoSource(SceneParams params) : params_(std::move(params)) {}
    double fps() const override { return params_.fps; }
    int frame_count() const override { return params_.n_frames; }
    std::optional<Image> next() override;

private:
    SceneParams params_;
    int pos_ = 0;
};

/// Registers a decoder for "*.scene.json" files. Safe to call repeatedly.
void register_scene_decoder();

}  // namespace nvi::synth
