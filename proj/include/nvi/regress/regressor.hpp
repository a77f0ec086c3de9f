#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nvi/data/types.hpp"
#include "nvi/image.hpp"
#include "nvi/nn/checkpoint.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::regress {

enum class RegressorKind { gesture, distance };

std::string_view to_string(RegressorKind kind);
std::optional<RegressorKind> parse_regressor_kind(std::string_view text);
data::Construct construct_of(RegressorKind kind);

/// A model input after the model's fixed preprocessing, ready for repeated
/// training passes without keeping full-size images around.
struct RegressorSample {
    Image features;
    float target = 0.0f;
};

/// Maps a 360x360x3 input to one scalar on the normalised label scale.
class ImageRegressor {
public:
    virtual ~ImageRegressor() = default;

    virtual RegressorKind kind() const = 0;
    virtual std::string_view backbone() const = 0;
    virtual nlohmann::ordered_json architecture() const = 0;

    virtual Eigen::VectorXf& parameters() = 0;
    virtual const Eigen::VectorXf& parameters() const = 0;
    virtual Eigen::VectorXf& gradients() = 0;

    virtual RegressorSample prepare(const Image& input, float target = 0.0f) const = 0;
    virtual double accumulate_gradient(const RegressorSample& sample, float scale) = 0;
    virtual float predict(const RegressorSample& sample) const = 0;

    float predict_image(const Image& input) const { return predict(prepare(input)); }

    /// When false, training leaves the convolutional backbone fixed.
    bool fine_tune_backbone = true;
};

inline constexpr std::string_view kSmallCnn = "small-cnn";
inline constexpr std::string_view kResNet18 = "resnet18";

std::vector<std::string> known_backbones();

/// "small-cnn" is the randomly initialised test backbone. "resnet18" is
/// recognised but needs pretrained weights this build does not ship, so it
/// raises ConfigError like any unknown name.
std::unique_ptr<ImageRegressor> build_regressor(RegressorKind kind, std::string_view backbone, std::uint64_t seed);

struct TargetPair {
    std::string frame_id;
    std::string segment_id;
    int frame_index = 0;
    double target = 0.0;  // median / scale_max
};

struct PreparedTargets {
    std::vector<TargetPair> train;
    std::vector<TargetPair> validation;
    std::size_t train_labels = 0;
    std::size_t excluded = 0;  // training triples dropped for disagreement
};

/// Training frames are filtered by rater disagreement, validation frames are
/// all kept. Frames of external segments are ignored. Throws
/// ValidationError when no training pair survives.
PreparedTargets prepare_targets(const data::DatasetManifest& manifest, RegressorKind kind,
                                const nn::TrainConfig& config);

nn::Checkpoint train_regressor(ImageRegressor& model, std::span<const RegressorSample> train,
                               std::span<const RegressorSample> validation, const nn::TrainConfig& config);

std::unique_ptr<ImageRegressor> load_regressor(const nn::Checkpoint& checkpoint);

struct RegressorEvaluation {
    /// nullopt when the correlation is undefined (n < 3, constant series);
    /// `pearson_note` then says why.
    std::optional<stats::CorrelationResult> pearson;
    std::string pearson_note;
    std::optional<double> accuracy;
};

/// Pearson r of predictions against targets; with a threshold t, also the
/// share of samples where (prediction >= t) == (target >= t).
RegressorEvaluation evaluate_predictions(std::span<const double> predictions, std::span<const double> targets,
                                         std::optional<double> threshold = std::nullopt);

RegressorEvaluation evaluate_regressor(const ImageRegressor& model, std::span<const RegressorSample> samples,
                                       std::optional<double> threshold = std::nullopt);

}  // namespace nvi::regress
