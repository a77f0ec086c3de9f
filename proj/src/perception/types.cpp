#include "nvi/perception/types.hpp"

#include <cmath>
#include <string>

#include "nvi/error.hpp"

namespace nvi::perception {

std::optional<Emotion> parse_emotion(std::string_view name) {
    for (int i = 0; i < kEmotionCount; ++i)
        if (kEmotionNames[i] == name) return static_cast<Emotion>(i);
    return std::nullopt;
}

void validate_observation(const FrameObservation& obs) {
    const std::string where = "frame " + std::to_string(obs.frame_index) + ": ";
    if (obs.rgb.channels() != 3) throw ValidationError(where + "rgb must have 3 channels");
    const auto h = obs.rgb.height, w = obs.rgb.width;
    auto same_shape = [&](const auto& a) { return a.rows() == h && a.cols() == w; };
    if (!same_shape(obs.teacher_mask) || !same_shape(obs.student_mask) || !same_shape(obs.depth))
        throw ValidationError(where + "masks and depth must match the frame size");
    if ((obs.teacher_mask > 1).any() || (obs.student_mask > 1).any())
        throw ValidationError(where + "masks must be {0,1}-valued");
    if (((obs.teacher_mask != 0) && (obs.student_mask != 0)).any())
        throw ValidationError(where + "teacher and student masks overlap");
    if (!(obs.depth >= 0.0f).all() || !(obs.depth <= 1.0f).all())
        throw ValidationError(where + "depth outside [0, 1]");
    if (obs.emotions) {
        if (!obs.emotions->allFinite() || (obs.emotions->array() < 0.0f).any())
            throw ValidationError(where + "emotion confidences must be finite and non-negative");
        const double sum = obs.emotions->cast<double>().sum();
        if (std::fabs(sum - 1.0) > 1e-6) throw ValidationError(where + "emotion confidences must sum to 1");
    }
}

}  // namespace nvi::perception
