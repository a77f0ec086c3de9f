#include "nvi/regress/regressor.hpp"

#include <cmath>
#include <map>

#include "nvi/error.hpp"
#include "nvi/regress/inputs.hpp"
#include "nvi/regress/small_cnn.hpp"

namespace nvi::regress {
namespace {

using json = nlohmann::ordered_json;

constexpr int kStemPool = 8;
constexpr int kChannels = 3;

class SmallConvNet final : public ImageRegressor {
public:
    SmallConvNet(RegressorKind kind, std::uint64_t seed)
        : kind_(kind), core_(kChannels, kInputSize / kStemPool) {
        params_ = Eigen::VectorXf::Zero(core_.parameter_count());
        grads_ = Eigen::VectorXf::Zero(core_.parameter_count());
        std::mt19937_64 rng(seed);
        core_.init(params_, rng);
    }

    RegressorKind kind() const override { return kind_; }
    std::string_view backbone() const override { return kSmallCnn; }

    json architecture() const override {
        json a;
        a["input_size"] = kInputSize;
        a["input_channels"] = kChannels;
        a["stem_pool"] = kStemPool;
        a["conv_channels"] = {SmallCnnCore<float>::kChannels1, SmallCnnCore<float>::kChannels2};
        a["pool"] = SmallCnnCore<float>::kPool;
        a["head"] = {SmallCnnCore<float>::kHidden, 1};
        a["parameters"] = core_.parameter_count();
        return a;
    }

    Eigen::VectorXf& parameters() override { return params_; }
    const Eigen::VectorXf& parameters() const override { return params_; }
    Eigen::VectorXf& gradients() override { return grads_; }

    RegressorSample prepare(const Image& input, float target) const override {
        if (input.channels() != kChannels || input.height != kInputSize || input.width != kInputSize)
            throw ValidationError("regressor input must be " + std::to_string(kInputSize) + "x" +
                                  std::to_string(kInputSize) + "x3, got " + std::to_string(input.height) + "x" +
                                  std::to_string(input.width) + "x" + std::to_string(input.channels()));
        return {nn::avg_pool(input, kStemPool), target};
    }

    double accumulate_gradient(const RegressorSample& s, float scale) override {
        SmallCnnCore<float>::Trace trace;
        const float error = core_.forward(params_, s.features, trace) - s.target;
        core_.backward(params_, grads_, trace, scale * 2.0f * error, fine_tune_backbone);
        return static_cast<double>(error) * error;
    }

    float predict(const RegressorSample& s) const override { return core_.forward(params_, s.features); }

private:
    RegressorKind kind_;
    SmallCnnCore<float> core_;
    Eigen::VectorXf params_;
    Eigen::VectorXf grads_;
};

}  // namespace

std::string_view to_string(RegressorKind kind) { return kind == RegressorKind::gesture ? "gesture" : "distance"; }

std::optional<RegressorKind> parse_regressor_kind(std::string_view text) {
    if (text == "gesture") return RegressorKind::gesture;
    if (text == "distance") return RegressorKind::distance;
    return std::nullopt;
}

data::Construct construct_of(RegressorKind kind) {
    return kind == RegressorKind::gesture ? data::Construct::gesture_intensity : data::Construct::perceived_distance;
}

std::vector<std::string> known_backbones() { return {std::string(kSmallCnn), std::string(kResNet18)}; }

std::unique_ptr<ImageRegressor> build_regressor(RegressorKind kind, std::string_view backbone, std::uint64_t seed) {
    if (backbone == kSmallCnn) return std::make_unique<SmallConvNet>(kind, seed);
    if (backbone == kResNet18)
        throw ConfigError("backbone 'resnet18' needs pretrained ImageNet weights, which this build does not include; "
                          "use 'small-cnn'");
    throw ConfigError("unknown backbone '" + std::string(backbone) + "' (known: small-cnn, resnet18)");
}

PreparedTargets prepare_targets(const data::DatasetManifest& manifest, RegressorKind kind,
                                const nn::TrainConfig& config) {
    config.validate();
    if (std::fabs(config.scale_max - manifest.scale_max) > 1e-9)
        throw ConfigError("training scale_max " + std::to_string(config.scale_max) +
                          " differs from the dataset scale_max " + std::to_string(manifest.scale_max));
    std::map<std::string, data::Split> split_of;
    for (const auto& s : manifest.segments) split_of[s.segment_id] = s.split;

    const auto construct = construct_of(kind);
    PreparedTargets out;
    for (const auto& f : manifest.frame_labels) {
        const auto& rating = f.rating(construct);
        if (!rating) continue;
        const auto split = split_of.at(f.segment_id);
        TargetPair pair{f.frame_id, f.segment_id, f.frame_index, stats::median_rating(*rating) / config.scale_max};
        if (split == data::Split::train) {
            ++out.train_labels;
            if (stats::is_disagreement(*rating, config.sigma_max)) {
                ++out.excluded;
                continue;
            }
            out.train.push_back(std::move(pair));
        } else if (split == data::Split::validation) {
            out.validation.push_back(std::move(pair));
        }
    }
    if (out.train.empty())
        throw ValidationError("no " + std::string(to_string(kind)) + " training samples left: " +
                              std::to_string(out.excluded) + " of " + std::to_string(out.train_labels) +
                              " training labels exceed sigma_max " + std::to_string(config.sigma_max));
    return out;
}

nn::Checkpoint train_regressor(ImageRegressor& model, std::span<const RegressorSample> train,
                               std::span<const RegressorSample> validation, const nn::TrainConfig& config) {
    model.fine_tune_backbone = config.fine_tune_backbone;
    nn::Checkpoint c;
    c.metrics = nn::fit(model, train, validation, config);
    c.kind = std::string(to_string(model.kind()));
    c.backbone = std::string(model.backbone());
    c.architecture = model.architecture();
    c.config = config;
    c.weights = model.parameters();
    return c;
}

std::unique_ptr<ImageRegressor> load_regressor(const nn::Checkpoint& checkpoint) {
    const auto kind = parse_regressor_kind(checkpoint.kind);
    if (!kind) throw ConfigError("checkpoint kind '" + checkpoint.kind + "' is not an image regressor");
    auto model = build_regressor(*kind, checkpoint.backbone, checkpoint.config.seed);
    if (model->architecture() != checkpoint.architecture)
        throw ValidationError("checkpoint architecture does not match backbone '" + checkpoint.backbone + "'");
    if (checkpoint.weights.size() != model->parameters().size())
        throw ValidationError("checkpoint has " + std::to_string(checkpoint.weights.size()) + " weights, expected " +
                              std::to_string(model->parameters().size()));
    model->parameters() = checkpoint.weights;
    model->fine_tune_backbone = checkpoint.config.fine_tune_backbone;
    return model;
}

RegressorEvaluation evaluate_predictions(std::span<const double> predictions, std::span<const double> targets,
                                         std::optional<double> threshold) {
    if (predictions.empty()) throw ValidationError("cannot evaluate on an empty set");
    if (predictions.size() != targets.size()) throw ValidationError("prediction and target counts differ");
    RegressorEvaluation e;
    if (predictions.size() < 3) {
        e.pearson_note = "correlation needs at least 3 samples";
    } else {
        try {
            e.pearson = stats::pearson(predictions, targets);
        } catch (const UndefinedStatisticError& err) {
            e.pearson_note = err.what();
        }
    }
    if (threshold) {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < predictions.size(); ++i)
            agree += (predictions[i] >= *threshold) == (targets[i] >= *threshold);
        e.accuracy = static_cast<double>(agree) / static_cast<double>(predictions.size());
    }
    return e;
}

RegressorEvaluation evaluate_regressor(const ImageRegressor& model, std::span<const RegressorSample> samples,
                                       std::optional<double> threshold) {
    std::vector<double> preds, targets;
    for (const auto& s : samples) {
        preds.push_back(model.predict(s));
        targets.push_back(s.target);
    }
    return evaluate_predictions(preds, targets, threshold);
}

}  // namespace nvi::regress
