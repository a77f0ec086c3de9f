#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nvi/eval/rater_analysis.hpp"
#include "nvi/fusion/fusion.hpp"
#include "nvi/nn/training.hpp"
#include "nvi/perception/backends.hpp"
#include "nvi/synth/dataset.hpp"

namespace nvi::cli {

/// Environment variable naming the config file used when --config is absent.
inline constexpr const char* kConfigEnv = "NVI_CONFIG";

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir = "runs";
    std::string run_id = "default";
    std::uint64_t seed = 1;

    perception::BackendSelection backends;
    int workers = 1;
    int frame_stride = 1;

    std::string backbone = "small-cnn";
    nn::TrainConfig gesture, distance, nvi;
    fusion::EmotionWeighting emotion_weighting = fusion::EmotionWeighting::total_frames;

    /// Binary threshold for gesture accuracy, rating units. Default: half the scale.
    std::optional<double> threshold;
    eval::ItemSet icc_items = eval::ItemSet::validation;

    std::filesystem::path teacher_measures;
    std::filesystem::path video_measures;

    synth::SynthDatasetOptions synth;

    std::filesystem::path run_dir() const { return out_dir / run_id; }
    /// Copies the run seed into every block that did not set its own.
    void apply_seed();
    void validate() const;

    // Blocks whose seed was given explicitly.
    bool gesture_seed_set = false, distance_seed_set = false, nvi_seed_set = false, synth_seed_set = false;
};

/// Reads a JSON config. Relative paths resolve against the file's directory;
/// unknown keys raise ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::ordered_json& node, const std::filesystem::path& base_dir);

/// Every setting, suitable for writing next to the outputs.
nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace nvi::cli
