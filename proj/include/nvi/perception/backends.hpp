#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvi/perception/types.hpp"

namespace nvi::perception {

/// Teacher tracking plus person segmentation. `start` is called once with the
/// first frame and the manual teacher region; `track` then runs on every
/// frame in order, including the first.
class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    virtual std::string_view name() const = 0;
    virtual void start(const Image& first_frame, const BoundingBox& teacher_region) = 0;
    virtual MaskPair track(const Image& frame) = 0;
};

/// Monocular relative depth; any scale, normalised by the caller.
class DepthBackend {
public:
    virtual ~DepthBackend() = default;
    virtual std::string_view name() const = 0;
    virtual DepthMap estimate(const Image& frame) = 0;
};

/// Facial expression scores for the face found inside `search_region`, or
/// nullopt when there is none.
class EmotionBackend {
public:
    virtual ~EmotionBackend() = default;
    virtual std::string_view name() const = 0;
    virtual std::optional<EmotionVector> detect(const Image& frame, const BoundingBox& search_region) = 0;
};

struct BackendSelection {
    std::string segmentation = "synthetic";
    std::string depth = "synthetic";
    std::string emotion = "synthetic";
};

struct BackendSet {
    std::unique_ptr<SegmentationBackend> segmentation;
    std::unique_ptr<DepthBackend> depth;
    std::unique_ptr<EmotionBackend> emotion;
};

using SegmentationFactory = std::function<std::unique_ptr<SegmentationBackend>()>;
using DepthFactory = std::function<std::unique_ptr<DepthBackend>()>;
using EmotionFactory = std::function<std::unique_ptr<EmotionBackend>()>;

/// Adapter slots: register additional backends under a name. The synthetic
/// backends are always present.
void register_segmentation_backend(const std::string& name, SegmentationFactory factory);
void register_depth_backend(const std::string& name, DepthFactory factory);
void register_emotion_backend(const std::string& name, EmotionFactory factory);

std::vector<std::string> segmentation_backends();
std::vector<std::string> depth_backends();
std::vector<std::string> emotion_backends();

/// Instantiates one fresh backend per stage; unknown names raise ConfigError.
BackendSet make_backends(const BackendSelection& selection);

}  // namespace nvi::perception
