#include "nvi/cli/config.hpp"

#include <cmath>
#include <fstream>

#include "nvi/error.hpp"
#include "nvi/nn/checkpoint.hpp"

namespace nvi::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& text) {
    const fs::path p(text);
    return p.is_relative() && !base.empty() ? base / p : p;
}

template <typename T>
T get(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

void read_synth(const json& node, synth::SynthDatasetOptions& o, bool& seed_set) {
    if (!node.is_object()) throw ConfigError("config key 'synth' must be an object");
    for (const auto& [key, v] : node.items()) {
        const std::string k = "synth." + key;
        if (key == "seed") o.seed = get<std::uint64_t>(v, k), seed_set = true;
        else if (key == "train_teachers") o.train_teachers = get<int>(v, k);
        else if (key == "validation_teachers") o.validation_teachers = get<int>(v, k);
        else if (key == "external_teachers") o.external_teachers = get<int>(v, k);
        else if (key == "videos_per_teacher") o.videos_per_teacher = get<int>(v, k);
        else if (key == "segments_per_video") o.segments_per_video = get<int>(v, k);
        else if (key == "fps") o.fps = get<double>(v, k);
        else if (key == "segment_duration") o.segment_duration = get<double>(v, k);
        else if (key == "labelled_frames_per_segment") o.labelled_frames_per_segment = get<int>(v, k);
        else if (key == "width") o.width = get<int>(v, k);
        else if (key == "height") o.height = get<int>(v, k);
        else if (key == "scale_max") o.scale_max = get<double>(v, k);
        else if (key == "rater_bias_sd") o.rater_bias_sd = get<double>(v, k);
        else if (key == "rater_noise_sd") o.rater_noise_sd = get<double>(v, k);
        else if (key == "hard_item_fraction") o.hard_item_fraction = get<double>(v, k);
        else if (key == "hard_noise_sd") o.hard_noise_sd = get<double>(v, k);
        else if (key == "low_quality_fraction") o.low_quality_fraction = get<double>(v, k);
        else if (key == "measure_correlation") o.measure_correlation = get<double>(v, k);
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

json synth_json(const synth::SynthDatasetOptions& o) {
    return {{"seed", o.seed},
            {"train_teachers", o.train_teachers},
            {"validation_teachers", o.validation_teachers},
            {"external_teachers", o.external_teachers},
            {"videos_per_teacher", o.videos_per_teacher},
            {"segments_per_video", o.segments_per_video},
            {"fps", o.fps},
            {"segment_duration", o.segment_duration},
            {"labelled_frames_per_segment", o.labelled_frames_per_segment},
            {"width", o.width},
            {"height", o.height},
            {"scale_max", o.scale_max},
            {"rater_bias_sd", o.rater_bias_sd},
            {"rater_noise_sd", o.rater_noise_sd},
            {"hard_item_fraction", o.hard_item_fraction},
            {"hard_noise_sd", o.hard_noise_sd},
            {"low_quality_fraction", o.low_quality_fraction},
            {"measure_correlation", o.measure_correlation}};
}

}  // namespace

void RunConfig::apply_seed() {
    if (!gesture_seed_set) gesture.seed = seed;
    if (!distance_seed_set) distance.seed = seed;
    if (!nvi_seed_set) nvi.seed = seed;
    if (!synth_seed_set) synth.seed = seed;
}

void RunConfig::validate() const {
    if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id == "." || run_id == "..")
        throw ConfigError("run id '" + run_id + "' must be a plain, non-empty name");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (frame_stride < 1) throw ConfigError("frame_stride must be >= 1");
    if (threshold && !std::isfinite(*threshold)) throw ConfigError("threshold must be finite");
    gesture.validate();
    distance.validate();
    nvi.validate();
}

RunConfig config_from_json(const json& node, const fs::path& base) {
    if (!node.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for (const auto& [key, v] : node.items()) {
        if (key == "manifest") c.manifest = resolve(base, get<std::string>(v, key));
        else if (key == "out_dir") c.out_dir = resolve(base, get<std::string>(v, key));
        else if (key == "run_id") c.run_id = get<std::string>(v, key);
        else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
        else if (key == "backends") {
            if (!v.is_object()) throw ConfigError("config key 'backends' must be an object");
            for (const auto& [stage, name] : v.items()) {
                const auto n = get<std::string>(name, "backends." + stage);
                if (stage == "segmentation") c.backends.segmentation = n;
                else if (stage == "depth") c.backends.depth = n;
                else if (stage == "emotion") c.backends.emotion = n;
                else throw ConfigError("unknown config key 'backends." + stage + "'");
            }
        } else if (key == "workers") c.workers = get<int>(v, key);
        else if (key == "frame_stride") c.frame_stride = get<int>(v, key);
        else if (key == "backbone") c.backbone = get<std::string>(v, key);
        else if (key == "gesture" || key == "distance" || key == "nvi") {
            auto& block = key == "gesture" ? c.gesture : key == "distance" ? c.distance : c.nvi;
            block = nn::train_config_from_json(v, block);
            if (v.contains("seed"))
                (key == "gesture" ? c.gesture_seed_set : key == "distance" ? c.distance_seed_set : c.nvi_seed_set) = true;
        } else if (key == "emotion_weighting") {
            const auto w = fusion::parse_emotion_weighting(get<std::string>(v, key));
            if (!w) throw ConfigError("emotion_weighting must be total_frames or visible_frames");
            c.emotion_weighting = *w;
        } else if (key == "threshold") {
            if (!v.is_null()) c.threshold = get<double>(v, key);
        } else if (key == "icc_items") {
            const auto s = eval::parse_item_set(get<std::string>(v, key));
            if (!s) throw ConfigError("icc_items must be validation, train, external or all");
            c.icc_items = *s;
        } else if (key == "teacher_measures") c.teacher_measures = resolve(base, get<std::string>(v, key));
        else if (key == "video_measures") c.video_measures = resolve(base, get<std::string>(v, key));
        else if (key == "synth") read_synth(v, c.synth, c.synth_seed_set);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    json node;
    try {
        node = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }
    return config_from_json(node, path.parent_path());
}

json to_json(const RunConfig& c) {
    json j;
    j["manifest"] = c.manifest.string();
    j["out_dir"] = c.out_dir.string();
    j["run_id"] = c.run_id;
    j["seed"] = c.seed;
    j["backends"] = {{"segmentation", c.backends.segmentation},
                     {"depth", c.backends.depth},
                     {"emotion", c.backends.emotion}};
    j["workers"] = c.workers;
    j["frame_stride"] = c.frame_stride;
    j["backbone"] = c.backbone;
    j["gesture"] = nn::to_json(c.gesture);
    j["distance"] = nn::to_json(c.distance);
    j["nvi"] = nn::to_json(c.nvi);
    j["emotion_weighting"] = fusion::to_string(c.emotion_weighting);
    j["threshold"] = c.threshold ? json(*c.threshold) : json(nullptr);
    j["icc_items"] = eval::to_string(c.icc_items);
    j["teacher_measures"] = c.teacher_measures.string();
    j["video_measures"] = c.video_measures.string();
    j["synth"] = synth_json(c.synth);
    return j;
}

}  // namespace nvi::cli
