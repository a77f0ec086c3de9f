#include "nvi/perception/pipeline.hpp"

#include <string>

#include "nvi/error.hpp"

namespace nvi::perception {
namespace {

void check_init(const TrackInit& init, const Image& first) {
    const auto& r = init.region;
    if (init.frame_index != 0) throw ValidationError("track init must refer to the first frame");
    if (r.area() <= 0) throw ValidationError("track init region has no area");
    if (r.x < 0 || r.y < 0 || r.x + r.width > first.width || r.y + r.height > first.height)
        throw ValidationError("track init region lies outside the frame");
}

template <typename F>
auto stage(const char* name, int frame_index, F&& body) {
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, frame_index, e.what());
    }
}

}  // namespace

void enforce_disjoint(MaskPair& masks) {
    masks.student = (masks.teacher != 0).select(Mask::Zero(masks.student.rows(), masks.student.cols()), masks.student);
}

DepthMap normalize_depth(const DepthMap& raw) {
    if (raw.size() == 0) return raw;
    const float lo = raw.minCoeff();
    const float hi = raw.maxCoeff();
    if (!(hi > lo)) return DepthMap::Zero(raw.rows(), raw.cols());
    return ((raw - lo) / (hi - lo)).cwiseMax(0.0f).cwiseMin(1.0f);
}

namespace {

MaskPair checked_track(SegmentationBackend& backend, const Image& frame, int index) {
    auto masks = stage("segmentation", index, [&] { return backend.track(frame); });
    if (masks.teacher.rows() != frame.height || masks.teacher.cols() != frame.width ||
        masks.student.rows() != frame.height || masks.student.cols() != frame.width)
        throw PipelineError("segmentation", index, "backend returned masks of the wrong size");
    masks.teacher = (masks.teacher != 0).cast<std::uint8_t>();
    masks.student = (masks.student != 0).cast<std::uint8_t>();
    enforce_disjoint(masks);
    return masks;
}

}  // namespace

std::vector<MaskPair> segment_and_track(std::span<const Image> frames, const TrackInit& init,
                                        SegmentationBackend& backend) {
    if (frames.empty()) return {};
    check_init(init, frames.front());
    stage("segmentation", 0, [&] {
        backend.start(frames.front(), init.region);
        return 0;
    });
    std::vector<MaskPair> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) out.push_back(checked_track(backend, frames[i], static_cast<int>(i)));
    return out;
}

DepthMap estimate_depth(const Image& frame, DepthBackend& backend, int frame_index) {
    const DepthMap raw = stage("depth", frame_index, [&] { return backend.estimate(frame); });
    if (raw.rows() != frame.height || raw.cols() != frame.width)
        throw PipelineError("depth", frame_index, "backend returned a depth map of the wrong size");
    if (!raw.isFinite().all()) throw PipelineError("depth", frame_index, "backend returned non-finite depth");
    return normalize_depth(raw);
}

std::optional<EmotionVector> detect_emotions(const Image& frame, const Mask& teacher_mask, EmotionBackend& backend,
                                             int frame_index) {
    const auto region = bounding_box(teacher_mask);
    if (!region) return std::nullopt;
    auto scores = stage("emotion", frame_index, [&] { return backend.detect(frame, *region); });
    if (!scores) return std::nullopt;
    if (!scores->allFinite() || (scores->array() < 0.0f).any())
        throw PipelineError("emotion", frame_index, "backend returned invalid confidences");
    const double sum = scores->cast<double>().sum();
    if (!(sum > 0.0)) throw PipelineError("emotion", frame_index, "backend returned all-zero confidences");
    return EmotionVector((scores->cast<double>() / sum).cast<float>());
}

std::vector<FrameObservation> extract_observations(VideoSource& video, const TrackInit& init, BackendSet& backends,
                                                   const ExtractionOptions& options) {
    if (options.frame_stride < 1) throw ConfigError("frame_stride must be >= 1");
    if (!backends.segmentation || !backends.depth || !backends.emotion)
        throw ConfigError("extraction needs segmentation, depth and emotion backends");

    std::vector<FrameObservation> out;
    int index = 0;
    auto frame = stage("decode", 0, [&] { return video.next(); });
    if (!frame) return out;
    check_init(init, *frame);
    stage("segmentation", 0, [&] {
        backends.segmentation->start(*frame, init.region);
        return 0;
    });
    while (frame) {
        auto masks = checked_track(*backends.segmentation, *frame, index);
        if (index % options.frame_stride == 0) {
            FrameObservation obs;
            obs.frame_index = index;
            obs.depth = estimate_depth(*frame, *backends.depth, index);
            obs.emotions = detect_emotions(*frame, masks.teacher, *backends.emotion, index);
            obs.teacher_mask = std::move(masks.teacher);
            obs.student_mask = std::move(masks.student);
            obs.rgb = std::move(*frame);
            out.push_back(std::move(obs));
        }
        ++index;
        frame = stage("decode", index, [&] { return video.next(); });
    }
    return out;
}

}  // namespace nvi::perception
