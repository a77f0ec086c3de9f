#pragma once
// Colour code shared by the scene generator and the synthetic backends.
//
// Every rendered surface has a fixed albedo, shaded by its depth:
//     pixel = albedo * (1 - kShadeSlope * depth)
// Chromaticity therefore identifies the surface class regardless of depth,
// and the brightness of the dominant channel recovers the depth exactly.
// Faces carry the emotion index in their blue/red ratio.

#include <array>
#include <optional>

#include "nvi/perception/backends.hpp"

namespace nvi::perception::synthetic {

using Rgb = std::array<float, 3>;

inline constexpr float kShadeSlope = 0.5f;
inline constexpr Rgb kBackgroundAlbedo{0.7f, 0.7f, 0.7f};
inline constexpr Rgb kPersonAlbedo{0.9f, 0.15f, 0.15f};
inline constexpr Rgb kDeskAlbedo{0.15f, 0.15f, 0.9f};
inline constexpr float kFaceRed = 0.9f;
/// Confidence placed on the tagged emotion; the rest share the remainder.
inline constexpr float kTagConfidence = 0.65f;

enum class Surface { background, person, face, desk };

Rgb face_albedo(Emotion emotion);
Rgb shade(const Rgb& albedo, float depth);

struct DecodedPixel {
    Surface surface = Surface::background;
    float depth = 0.0f;
    std::optional<Emotion> emotion;  // faces only
};

DecodedPixel decode_pixel(float r, float g, float b);

/// Confidence vector reported for a face tagged `emotion`.
EmotionVector emotion_confidences(Emotion emotion);

/// People and faces form the "human" class; teacher identity comes from
/// connected-component overlap with the previous teacher mask.
class SegmentationTracker final : public SegmentationBackend {
public:
    std::string_view name() const override { return "synthetic"; }
    void start(const Image& first_frame, const BoundingBox& teacher_region) override;
    MaskPair track(const Image& frame) override;

private:
    Mask previous_teacher_;
    bool started_ = false;
};

class DepthDecoder final : public DepthBackend {
public:
    std::string_view name() const override { return "synthetic"; }
    DepthMap estimate(const Image& frame) override;
};

class EmotionDecoder final : public EmotionBackend {
public:
    std::string_view name() const override { return "synthetic"; }
    std::optional<EmotionVector> detect(const Image& frame, const BoundingBox& search_region) override;
};

/// Human-class pixels (person or face) of a frame.
Mask human_mask(const Image& frame);

/// 4-connected component labels; 0 = background, components numbered from 1.
Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> label_components(const Mask& mask,
                                                                                     int* count = nullptr);

}  // namespace nvi::perception::synthetic
