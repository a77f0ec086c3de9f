#pragma once

#include "nvi/image.hpp"
#include "nvi/perception/types.hpp"

namespace nvi::regress {

inline constexpr int kInputSize = 360;

/// Teacher-masked RGB at size x size. Masking happens before and after the
/// resize, so pixels outside the resized mask are exactly 0 and background
/// pixels of the source cannot bleed into the result.
Image make_gesture_input(const Image& rgb, const Mask& teacher_mask, int size = kInputSize);

/// Channels: depth (bilinear), teacher mask and student mask (nearest).
Image make_distance_input(const DepthMap& depth, const Mask& teacher_mask, const Mask& student_mask,
                          int size = kInputSize);

enum class RegressorKind;

/// The input `kind` expects, built from one extracted frame.
Image make_regressor_input(RegressorKind kind, const perception::FrameObservation& frame, int size = kInputSize);

}  // namespace nvi::regress
