#include "nvi/fusion/fusion.hpp"

#include <cmath>

#include "nvi/error.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::fusion {
namespace {

using json = nlohmann::ordered_json;

}  // namespace

std::string_view to_string(EmotionWeighting w) {
    return w == EmotionWeighting::total_frames ? "total_frames" : "visible_frames";
}

std::optional<EmotionWeighting> parse_emotion_weighting(std::string_view text) {
    if (text == "total_frames") return EmotionWeighting::total_frames;
    if (text == "visible_frames") return EmotionWeighting::visible_frames;
    return std::nullopt;
}

FeatureArray SegmentFeatureVector::flatten() const {
    FeatureArray x;
    x << gesture, distance, emotions;
    return x;
}

void SegmentFeatureVector::validate() const {
    if (total_frames < 1) throw ValidationError("feature vector: total_frames must be >= 1");
    if (visible_face_frames < 0 || visible_face_frames > total_frames)
        throw ValidationError("feature vector: visible_face_frames outside [0, total_frames]");
    const FeatureArray x = flatten();
    for (int i = 0; i < kFeatureDims; ++i)
        if (!std::isfinite(x(i)))
            throw ValidationError("feature vector: non-finite value in '" + std::string(kFeatureOrder[i]) + "'");
}

SegmentFeatureVector aggregate_segment(std::span<const FrameFeatures> frames, EmotionWeighting weighting) {
    if (frames.empty()) throw ValidationError("cannot aggregate an empty frame sequence");
    SegmentFeatureVector v;
    v.weighting = weighting;
    v.total_frames = static_cast<int>(frames.size());
    for (const auto& f : frames) {
        v.gesture += f.gesture;
        v.distance += f.distance;
        if (f.emotions) {
            v.emotions += *f.emotions;
            ++v.visible_face_frames;
        }
    }
    v.gesture /= v.total_frames;
    v.distance /= v.total_frames;
    const int denominator = weighting == EmotionWeighting::total_frames ? v.total_frames : v.visible_face_frames;
    if (denominator > 0) v.emotions /= denominator;
    v.validate();
    return v;
}

json to_json(const SegmentFeatureVector& v) {
    json j;
    j["layout_version"] = v.layout_version;
    j["weighting"] = to_string(v.weighting);
    json values = json::object();
    const FeatureArray x = v.flatten();
    for (int i = 0; i < kFeatureDims; ++i) values[std::string(kFeatureOrder[i])] = x(i);
    j["values"] = std::move(values);
    j["visible_face_frames"] = v.visible_face_frames;
    j["total_frames"] = v.total_frames;
    return j;
}

SegmentFeatureVector feature_vector_from_json(const json& j) {
    SegmentFeatureVector v;
    try {
        v.layout_version = j.at("layout_version").get<int>();
        const auto w = parse_emotion_weighting(j.at("weighting").get<std::string>());
        if (!w) throw ValidationError("unknown emotion weighting '" + j.at("weighting").get<std::string>() + "'");
        v.weighting = *w;
        const auto& values = j.at("values");
        FeatureArray x;
        for (int i = 0; i < kFeatureDims; ++i) x(i) = values.at(std::string(kFeatureOrder[i])).get<double>();
        v.gesture = x(0);
        v.distance = x(1);
        v.emotions = x.tail<kEmotionDims>();
        v.visible_face_frames = j.at("visible_face_frames").get<int>();
        v.total_frames = j.at("total_frames").get<int>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("feature vector: ") + e.what());
    }
    v.validate();
    return v;
}

NviModel::NviModel(std::uint64_t seed) {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i] = nn::Dense<float>(layout_, kWidths[i], kWidths[i + 1]);
    params_ = Eigen::VectorXf::Zero(layout_.size());
    grads_ = Eigen::VectorXf::Zero(layout_.size());
    std::mt19937_64 rng(seed);
    for (const auto& l : layers_) l.init(params_, rng);
}

double NviModel::accumulate_gradient(const NviSample& s, float scale) {
    std::array<Eigen::MatrixXf, 5> act;
    act[0] = s.x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        act[i + 1] = layers_[i].forward(params_, act[i]);
        if (i + 1 < layers_.size()) act[i + 1] = nn::relu(act[i + 1]);
    }
    const float error = act[4](0, 0) - s.target;
    Eigen::MatrixXf grad = Eigen::MatrixXf::Constant(1, 1, scale * 2.0f * error);
    for (std::size_t i = layers_.size(); i-- > 0;) {
        grad = layers_[i].backward(params_, grads_, act[i], grad);
        if (i > 0) grad = nn::relu_backward(grad, act[i]);
    }
    return static_cast<double>(error) * error;
}

float NviModel::predict(const NviSample& s) const {
    Eigen::MatrixXf a = s.x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        a = layers_[i].forward(params_, a);
        if (i + 1 < layers_.size()) a = nn::relu(a);
    }
    return a(0, 0);
}

json NviModel::architecture(EmotionWeighting weighting) const {
    json a;
    a["widths"] = kWidths;
    a["activation"] = "relu";
    a["feature_layout_version"] = kFeatureLayoutVersion;
    json order = json::array();
    for (auto name : kFeatureOrder) order.push_back(std::string(name));
    a["feature_order"] = std::move(order);
    a["emotion_weighting"] = to_string(weighting);
    a["parameters"] = params_.size();
    return a;
}

NviSample make_nvi_sample(const SegmentFeatureVector& v, double target) {
    v.validate();
    return {v.flatten().cast<float>(), static_cast<float>(target)};
}

NviDataset build_nvi_dataset(const data::DatasetManifest& manifest,
                             const std::map<std::string, SegmentFeatureVector>& features,
                             const nn::TrainConfig& config) {
    config.validate();
    NviDataset ds;
    std::vector<std::string> missing;
    for (const auto& label : manifest.segment_labels) {
        const auto* seg = manifest.find_segment(label.segment_id);
        if (!seg || seg->split == data::Split::external) continue;
        if (seg->split == data::Split::train && label.low_quality) {
            ++ds.low_quality_excluded;
            continue;
        }
        const auto it = features.find(label.segment_id);
        if (it == features.end()) {
            missing.push_back(label.segment_id);
            continue;
        }
        const double target = stats::median_rating(label.rating) / manifest.scale_max;
        auto sample = make_nvi_sample(it->second, target);
        if (seg->split == data::Split::train) {
            ds.train_ids.push_back(label.segment_id);
            ds.train.push_back(sample);
        } else {
            ds.validation_ids.push_back(label.segment_id);
            ds.validation.push_back(sample);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw ValidationError("no feature vector for labelled segment(s): " + list);
    }
    if (ds.train.empty()) throw ValidationError("no NVI training samples");
    return ds;
}

nn::Checkpoint train_nvi(NviModel& model, std::span<const NviSample> train, std::span<const NviSample> validation,
                         const nn::TrainConfig& config, EmotionWeighting weighting) {
    nn::Checkpoint c;
    c.metrics = nn::fit(model, train, validation, config);
    c.kind = "nvi";
    c.backbone = "mlp";
    c.architecture = model.architecture(weighting);
    c.config = config;
    c.weights = model.parameters();
    return c;
}

NviPredictor::NviPredictor(const nn::Checkpoint& c) : model_(c.config.seed), scale_max_(c.config.scale_max) {
    if (c.kind != "nvi") throw ConfigError("checkpoint kind '" + c.kind + "' is not an NVI model");
    try {
        layout_version_ = c.architecture.at("feature_layout_version").get<int>();
        const auto w = parse_emotion_weighting(c.architecture.at("emotion_weighting").get<std::string>());
        if (!w) throw ValidationError("checkpoint names an unknown emotion weighting");
        weighting_ = *w;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("NVI checkpoint architecture: ") + e.what());
    }
    if (c.weights.size() != model_.parameters().size())
        throw ValidationError("NVI checkpoint has " + std::to_string(c.weights.size()) + " weights, expected " +
                              std::to_string(model_.parameters().size()));
    model_.parameters() = c.weights;
}

double NviPredictor::predict(const SegmentFeatureVector& v) const {
    if (v.layout_version != layout_version_)
        throw ValidationError("feature layout version " + std::to_string(v.layout_version) +
                              " does not match the model's version " + std::to_string(layout_version_));
    if (v.weighting != weighting_)
        throw ValidationError("feature vector uses emotion weighting '" + std::string(to_string(v.weighting)) +
                              "' but the model was trained with '" + std::string(to_string(weighting_)) + "'");
    return static_cast<double>(model_.predict(make_nvi_sample(v))) * scale_max_;
}

double predict_nvi(const nn::Checkpoint& checkpoint, const SegmentFeatureVector& v) {
    return NviPredictor(checkpoint).predict(v);
}

}  // namespace nvi::fusion
