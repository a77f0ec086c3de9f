#pragma once

#include <array>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "nvi/image.hpp"

namespace nvi::perception {

enum class Emotion { anger, contempt, disgust, fear, happiness, neutral, sadness, surprise };

inline constexpr int kEmotionCount = 8;
inline constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "anger", "contempt", "disgust", "fear", "happiness", "neutral", "sadness", "surprise"};

std::optional<Emotion> parse_emotion(std::string_view name);
inline std::string_view to_string(Emotion e) { return kEmotionNames[static_cast<int>(e)]; }

/// Confidences in kEmotionNames order.
using EmotionVector = Eigen::Matrix<float, kEmotionCount, 1>;

struct MaskPair {
    Mask teacher;
    Mask student;
};

/// Everything the downstream models need from one video frame.
struct FrameObservation {
    int frame_index = 0;
    Image rgb;  // 3 channels, [0, 1]
    Mask teacher_mask;
    Mask student_mask;  // union of all students
    DepthMap depth;     // [0, 1]
    std::optional<EmotionVector> emotions;  // nullopt: no teacher face found
};

/// Checks the FrameObservation invariants; throws ValidationError.
void validate_observation(const FrameObservation& obs);

/// Manually identified teacher location in the first frame.
struct TrackInit {
    int frame_index = 0;
    BoundingBox region;
};

}  // namespace nvi::perception
