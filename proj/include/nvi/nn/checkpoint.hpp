#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "nvi/nn/training.hpp"

namespace nvi::nn {

inline constexpr int kCheckpointSchemaVersion = 1;

/// Trained model state plus everything needed to rebuild and audit it.
struct Checkpoint {
    int schema_version = kCheckpointSchemaVersion;
    /// "gesture", "distance" or "nvi".
    std::string kind;
    std::string backbone;
    /// Model-specific structural settings (layer widths, feature order, ...).
    nlohmann::ordered_json architecture = nlohmann::ordered_json::object();
    TrainConfig config;
    std::vector<EpochMetrics> metrics;
    Eigen::VectorXf weights;
};

nlohmann::ordered_json to_json(const TrainConfig& config);
/// Missing keys keep the values already in `base`.
TrainConfig train_config_from_json(const nlohmann::ordered_json& node, TrainConfig base = {});

nlohmann::ordered_json to_json(const EpochMetrics& m);
nlohmann::ordered_json metrics_json(const Checkpoint& checkpoint);

/// Binary layout: magic "NVICKPT1", u32 schema version, u64 header length,
/// JSON header, u64 weight count, float32 weights (little endian).
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_metrics_file(const Checkpoint& checkpoint, const std::filesystem::path& path);

}  // namespace nvi::nn
