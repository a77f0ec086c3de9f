#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "nvi/data/types.hpp"
#include "nvi/nn/checkpoint.hpp"
#include "nvi/nn/layers.hpp"

namespace nvi::fusion {

inline constexpr int kEmotionDims = 8;
inline constexpr int kFeatureDims = 10;

/// Version of the flattened feature order below. Bump on any change.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr std::array<std::string_view, kFeatureDims> kFeatureOrder = {
    "gesture", "distance", "anger", "contempt", "disgust", "fear", "happiness", "neutral", "sadness", "surprise"};

using FeatureArray = Eigen::Matrix<double, kFeatureDims, 1>;
using EmotionArray = Eigen::Matrix<double, kEmotionDims, 1>;

/// Per-frame model outputs on the normalised scale.
struct FrameFeatures {
    double gesture = 0.0;
    double distance = 0.0;
    std::optional<EmotionArray> emotions;  // nullopt: no face visible
};

enum class EmotionWeighting {
    /// Sum of visible-face confidences divided by all frames.
    total_frames,
    /// Plain mean over the visible-face frames.
    visible_frames,
};

std::string_view to_string(EmotionWeighting w);
std::optional<EmotionWeighting> parse_emotion_weighting(std::string_view text);

struct SegmentFeatureVector {
    double gesture = 0.0;
    double distance = 0.0;
    EmotionArray emotions = EmotionArray::Zero();
    int visible_face_frames = 0;
    int total_frames = 0;
    int layout_version = kFeatureLayoutVersion;
    EmotionWeighting weighting = EmotionWeighting::total_frames;

    FeatureArray flatten() const;
    /// Throws ValidationError on broken counts or non-finite values.
    void validate() const;
    friend bool operator==(const SegmentFeatureVector&, const SegmentFeatureVector&) = default;
};

SegmentFeatureVector aggregate_segment(std::span<const FrameFeatures> frames,
                                       EmotionWeighting weighting = EmotionWeighting::total_frames);

nlohmann::ordered_json to_json(const SegmentFeatureVector& v);
SegmentFeatureVector feature_vector_from_json(const nlohmann::ordered_json& node);

struct NviSample {
    Eigen::Matrix<float, kFeatureDims, 1> x;
    float target = 0.0f;
};

/// 10 -> 300 -> 100 -> 10 -> 1 perceptron, ReLU on the hidden layers.
class NviModel {
public:
    static constexpr std::array<int, 5> kWidths = {kFeatureDims, 300, 100, 10, 1};

    /// Weights plus biases of every layer.
    static constexpr Eigen::Index closed_form_parameter_count() {
        Eigen::Index n = 0;
        for (std::size_t i = 0; i + 1 < kWidths.size(); ++i) n += Eigen::Index(kWidths[i]) * kWidths[i + 1] + kWidths[i + 1];
        return n;
    }

    explicit NviModel(std::uint64_t seed);

    Eigen::VectorXf& parameters() { return params_; }
    const Eigen::VectorXf& parameters() const { return params_; }
    Eigen::VectorXf& gradients() { return grads_; }

    double accumulate_gradient(const NviSample& sample, float scale);
    float predict(const NviSample& sample) const;

    nlohmann::ordered_json architecture(EmotionWeighting weighting) const;

private:
    nn::ParameterLayout layout_;
    std::array<nn::Dense<float>, 4> layers_;
    Eigen::VectorXf params_;
    Eigen::VectorXf grads_;
};

NviSample make_nvi_sample(const SegmentFeatureVector& v, double target = 0.0);

struct NviDataset {
    std::vector<std::string> train_ids, validation_ids;
    std::vector<NviSample> train, validation;
    std::size_t low_quality_excluded = 0;
};

/// Training uses train-split segments not flagged low_quality; validation
/// keeps every validation segment. Targets are median / scale_max. Every
/// labelled train/validation segment must have a feature vector.
NviDataset build_nvi_dataset(const data::DatasetManifest& manifest,
                             const std::map<std::string, SegmentFeatureVector>& features,
                             const nn::TrainConfig& config);

nn::Checkpoint train_nvi(NviModel& model, std::span<const NviSample> train, std::span<const NviSample> validation,
                         const nn::TrainConfig& config, EmotionWeighting weighting = EmotionWeighting::total_frames);

/// A trained model bound to the layout, weighting and scale it was trained on.
class NviPredictor {
public:
    explicit NviPredictor(const nn::Checkpoint& checkpoint);

    /// Score in rating units. Rejects non-finite features and vectors built
    /// with a different layout version or emotion weighting.
    double predict(const SegmentFeatureVector& v) const;

    EmotionWeighting weighting() const { return weighting_; }

private:
    NviModel model_;
    EmotionWeighting weighting_;
    int layout_version_;
    double scale_max_;
};

double predict_nvi(const nn::Checkpoint& checkpoint, const SegmentFeatureVector& v);

}  // namespace nvi::fusion
