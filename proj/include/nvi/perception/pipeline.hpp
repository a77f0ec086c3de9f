#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nvi/perception/backends.hpp"
#include "nvi/perception/video.hpp"

namespace nvi::perception {

/// Removes teacher pixels from the student mask.
void enforce_disjoint(MaskPair& masks);

/// Min-max normalisation to [0, 1]; constant maps become all zeros.
DepthMap normalize_depth(const DepthMap& raw);

/// Tracks the teacher from `init` over every frame. Backend failures surface
/// as PipelineError tagged "segmentation" with the frame index.
std::vector<MaskPair> segment_and_track(std::span<const Image> frames, const TrackInit& init,
                                        SegmentationBackend& backend);

/// Relative depth for one frame, normalised to [0, 1] with the input's shape.
DepthMap estimate_depth(const Image& frame, DepthBackend& backend, int frame_index = 0);

/// Emotion confidences for the teacher, searched only inside the bounding box
/// of `teacher_mask`. The result is renormalised to sum to one.
std::optional<EmotionVector> detect_emotions(const Image& frame, const Mask& teacher_mask, EmotionBackend& backend,
                                             int frame_index = 0);

struct ExtractionOptions {
    /// Keep every n-th frame (tracking still visits all frames).
    int frame_stride = 1;
};

/// Runs tracking, depth and emotion extraction over a whole video.
std::vector<FrameObservation> extract_observations(VideoSource& video, const TrackInit& init, BackendSet& backends,
                                                   const ExtractionOptions& options = {});

}  // namespace nvi::perception
