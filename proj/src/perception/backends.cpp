#include "nvi/perception/backends.hpp"

#include <map>
#include <mutex>

#include "nvi/error.hpp"
#include "nvi/perception/synthetic.hpp"

namespace nvi::perception {
namespace {

template <typename Factory>
struct Registry {
    std::mutex mutex;
    std::map<std::string, Factory> factories;

    std::vector<std::string> names() {
        std::lock_guard lock(mutex);
        std::vector<std::string> out;
        for (const auto& [name, _] : factories) out.push_back(name);
        return out;
    }

    auto make(const std::string& stage, const std::string& name) {
        std::lock_guard lock(mutex);
        const auto it = factories.find(name);
        if (it == factories.end()) {
            std::string known;
            for (const auto& [n, _] : factories) known += (known.empty() ? "" : ", ") + n;
            throw ConfigError("unknown " + stage + " backend '" + name + "' (available: " + known + ")");
        }
        return it->second();
    }
};

Registry<SegmentationFactory>& segmentation_registry() {
    static Registry<SegmentationFactory> r{
        {}, {{"synthetic", [] { return std::make_unique<synthetic::SegmentationTracker>(); }}}};
    return r;
}

Registry<DepthFactory>& depth_registry() {
    static Registry<DepthFactory> r{{}, {{"synthetic", [] { return std::make_unique<synthetic::DepthDecoder>(); }}}};
    return r;
}

Registry<EmotionFactory>& emotion_registry() {
    static Registry<EmotionFactory> r{{}, {{"synthetic", [] { return std::make_unique<synthetic::EmotionDecoder>(); }}}};
    return r;
}

}  // namespace

void register_segmentation_backend(const std::string& name, SegmentationFactory factory) {
    auto& r = segmentation_registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

void register_depth_backend(const std::string& name, DepthFactory factory) {
    auto& r = depth_registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

void register_emotion_backend(const std::string& name, EmotionFactory factory) {
    auto& r = emotion_registry();
    std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

std::vector<std::string> segmentation_backends() { return segmentation_registry().names(); }
std::vector<std::string> depth_backends() { return depth_registry().names(); }
std::vector<std::string> emotion_backends() { return emotion_registry().names(); }

BackendSet make_backends(const BackendSelection& selection) {
    BackendSet set;
    set.segmentation = segmentation_registry().make("segmentation", selection.segmentation);
    set.depth = depth_registry().make("depth", selection.depth);
    set.emotion = emotion_registry().make("emotion", selection.emotion);
    return set;
}

}  // namespace nvi::perception
