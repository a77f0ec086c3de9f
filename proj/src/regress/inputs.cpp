#include "nvi/regress/inputs.hpp"

#include "nvi/error.hpp"
#include "nvi/regress/regressor.hpp"

namespace nvi::regress {

Image make_gesture_input(const Image& rgb, const Mask& teacher_mask, int size) {
    if (rgb.channels() != 3) throw ValidationError("gesture input needs an RGB frame");
    if (teacher_mask.rows() != rgb.height || teacher_mask.cols() != rgb.width)
        throw ValidationError("teacher mask does not match the frame size");
    Image masked = rgb;
    const auto keep = (teacher_mask != 0).cast<float>();
    for (int c = 0; c < 3; ++c) masked.plane(c) *= keep;

    Image out = resize_bilinear(masked, size, size);
    const auto resized_keep = (resize_nearest(teacher_mask, size, size) != 0).cast<float>();
    for (int c = 0; c < 3; ++c) out.plane(c) = (out.plane(c) * resized_keep).cwiseMax(0.0f).cwiseMin(1.0f);
    return out;
}

Image make_distance_input(const DepthMap& depth, const Mask& teacher_mask, const Mask& student_mask, int size) {
    if (teacher_mask.rows() != depth.rows() || teacher_mask.cols() != depth.cols() ||
        student_mask.rows() != depth.rows() || student_mask.cols() != depth.cols())
        throw ValidationError("masks do not match the depth map size");
    Image out(3, size, size);
    out.plane(0) = resize_bilinear(depth, size, size).cwiseMax(0.0f).cwiseMin(1.0f);
    out.plane(1) = (resize_nearest(teacher_mask, size, size) != 0).cast<float>();
    out.plane(2) = (resize_nearest(student_mask, size, size) != 0).cast<float>();
    return out;
}

Image make_regressor_input(RegressorKind kind, const perception::FrameObservation& frame, int size) {
    return kind == RegressorKind::gesture ? make_gesture_input(frame.rgb, frame.teacher_mask, size)
                                          : make_distance_input(frame.depth, frame.teacher_mask, frame.student_mask, size);
}

}  // namespace nvi::regress
