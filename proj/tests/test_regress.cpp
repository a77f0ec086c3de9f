#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

#include "nvi/error.hpp"
#include "nvi/perception/pipeline.hpp"
#include "nvi/regress/inputs.hpp"
#include "nvi/regress/regressor.hpp"
#include "nvi/regress/small_cnn.hpp"
#include "nvi/synth/dataset.hpp"
#include "oracles.hpp"

using namespace nvi;
using namespace nvi::regress;

namespace {

Image random_image(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Image img(3, h, w);
    for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data.data()[i] = u(rng);
    return img;
}

Mask blob_mask(int h, int w) {
    Mask m = Mask::Zero(h, w);
    m.block(h / 4, w / 3, h / 2, w / 4).setOnes();
    return m;
}

data::RatingTriple triple(double a, double b, double c) {
    return {"item", data::Construct::gesture_intensity, {a, b, c}, {"G1", "G2", "G3"}};
}

// Synthetic frames with targets, sized for quick tests.
struct Frames {
    std::vector<RegressorSample> train, validation;
};

Frames synthetic_frames(RegressorKind kind, const ImageRegressor& model, int train_teachers, int val_teachers) {
    synth::SynthDatasetOptions o;
    o.seed = 21;
    o.train_teachers = train_teachers;
    o.validation_teachers = val_teachers;
    o.external_teachers = 0;
    const auto ds = synth::make_synthetic_dataset(o);
    nn::TrainConfig cfg;
    const auto targets = prepare_targets(ds.manifest, kind, cfg);

    std::map<std::string, std::vector<perception::FrameObservation>> obs;
    for (std::size_t i = 0; i < ds.scenes.size(); ++i) {
        synth::SceneVideoSource video(ds.scenes[i]);
        auto backends = perception::make_backends({});
        obs[ds.manifest.segments[i].segment_id] =
            perception::extract_observations(video, {0, *ds.manifest.segments[i].teacher_box}, backends);
    }
    auto build = [&](const std::vector<TargetPair>& pairs) {
        std::vector<RegressorSample> out;
        for (const auto& p : pairs)
            out.push_back(model.prepare(make_regressor_input(kind, obs.at(p.segment_id).at(p.frame_index)),
                                        static_cast<float>(p.target)));
        return out;
    };
    return {build(targets.train), build(targets.validation)};
}

}  // namespace

TEST_CASE("regressors map one input to one finite scalar") {
    for (auto kind : {RegressorKind::gesture, RegressorKind::distance}) {
        const auto model = build_regressor(kind, "small-cnn", 1);
        CHECK(std::isfinite(model->predict_image(Image(3, kInputSize, kInputSize))));
        CHECK(model->kind() == kind);
    }
    const auto model = build_regressor(RegressorKind::distance, "small-cnn", 1);
    const auto input = make_distance_input(DepthMap::Constant(90, 120, 0.5f), blob_mask(90, 120), Mask::Zero(90, 120));
    CHECK(std::isfinite(model->predict_image(input)));
    CHECK_THROWS_AS(model->predict_image(Image(3, 100, 100)), ValidationError);
}

TEST_CASE("unknown or unavailable backbones are configuration errors") {
    CHECK_THROWS_AS(build_regressor(RegressorKind::gesture, "vgg", 0), ConfigError);
    CHECK_THROWS_AS(build_regressor(RegressorKind::gesture, "resnet18", 0), ConfigError);
    CHECK(parse_regressor_kind("gesture") == RegressorKind::gesture);
    CHECK_FALSE(parse_regressor_kind("nvi"));
}

TEST_CASE("gesture input zeroes everything outside the teacher") {
    const Image rgb = random_image(90, 120, 4);
    const Mask mask = blob_mask(90, 120);
    const Image input = make_gesture_input(rgb, mask);
    CHECK(input.height == kInputSize);
    CHECK(input.width == kInputSize);
    const Mask big = resize_nearest(mask, kInputSize, kInputSize);
    for (int c = 0; c < 3; ++c) CHECK(((big == 0) <= (input.plane(c) == 0.0f)).all());

    Image perturbed = random_image(90, 120, 5);
    for (int c = 0; c < 3; ++c) perturbed.plane(c) = (mask != 0).select(rgb.plane(c), perturbed.plane(c));
    const Image input2 = make_gesture_input(perturbed, mask);
    CHECK(input2 == input);
    const auto model = build_regressor(RegressorKind::gesture, "small-cnn", 2);
    CHECK(model->predict_image(input2) == model->predict_image(input));
}

TEST_CASE("distance input channels") {
    std::mt19937_64 rng(6);
    DepthMap depth = DepthMap::Random(90, 120).abs();
    Mask student = Mask::Zero(90, 120);
    student.block(70, 10, 15, 20).setOnes();
    const Image input = make_distance_input(depth, blob_mask(90, 120), student);
    CHECK(input.plane(0).minCoeff() >= 0.0f);
    CHECK(input.plane(0).maxCoeff() <= 1.0f);
    for (int c : {1, 2}) CHECK(((input.plane(c) == 0.0f) || (input.plane(c) == 1.0f)).all());
    CHECK(input.plane(2).sum() > 0.0f);
}

TEST_CASE("prepare_targets normalises medians and filters training only") {
    data::DatasetManifest m;
    m.fps = 1.0;
    m.segments = {{"A", "T1", "V1", 0, 30, "a", data::Split::train, std::nullopt},
                  {"B", "T2", "V2", 0, 30, "b", data::Split::validation, std::nullopt},
                  {"C", "T3", "V3", 0, 30, "c", data::Split::external, std::nullopt}};
    auto label = [](std::string id, std::string seg, data::RatingTriple t) {
        data::FrameLabelRecord f;
        f.frame_id = id;
        f.segment_id = seg;
        t.item_id = id;
        f.gesture = t;
        return f;
    };
    m.frame_labels = {label("a1", "A", triple(4000, 5000, 4500)), label("a2", "A", triple(0, 5000, 10000)),
                      label("b1", "B", triple(0, 5000, 10000)), label("b2", "B", triple(100, 200, 300)),
                      label("c1", "C", triple(1, 2, 3))};
    const auto t = prepare_targets(m, RegressorKind::gesture, nn::TrainConfig{});
    REQUIRE(t.train.size() == 1);
    CHECK(t.train[0].target == doctest::Approx(0.45));
    CHECK(t.excluded == 1);
    CHECK(t.validation.size() == 2);

    m.frame_labels.erase(m.frame_labels.begin());
    CHECK_THROWS_AS(prepare_targets(m, RegressorKind::gesture, nn::TrainConfig{}), ValidationError);
    CHECK_THROWS_AS(prepare_targets(m, RegressorKind::distance, nn::TrainConfig{}), ValidationError);
}

TEST_CASE("training filter count matches an independent standard deviation pass") {
    std::mt19937_64 rng(2451);
    std::uniform_real_distribution<double> centre(1000, 9000), spread(0, 3000);
    std::normal_distribution<double> g;
    data::DatasetManifest m;
    m.fps = 100.0;  // 3000 frames per segment
    m.segments = {{"S", "T", "V", 0, 30, "s", data::Split::train, std::nullopt}};
    std::size_t expected = 0;
    for (int i = 0; i < 2451; ++i) {
        data::FrameLabelRecord f;
        f.frame_id = "f" + std::to_string(i);
        f.segment_id = "S";
        f.frame_index = i;
        const double c = centre(rng), s = spread(rng);
        data::RatingTriple t = triple(0, 0, 0);
        for (auto& v : t.values) v = std::clamp(std::round(c + s * g(rng)), 0.0, 10000.0);
        f.gesture = t;
        m.frame_labels.push_back(f);
        expected += oracle::sample_std({t.values[0], t.values[1], t.values[2]}) < 1600.0;
    }
    const auto t = prepare_targets(m, RegressorKind::gesture, nn::TrainConfig{});
    CHECK(t.train.size() == expected);
    CHECK(t.train_labels == 2451);
    CHECK(t.excluded == 2451 - expected);
}

TEST_CASE("small cnn gradient matches finite differences") {
    SmallCnnCore<double> core(3, 9);
    std::mt19937_64 rng(9);
    nn::Vector<double> params = nn::Vector<double>::Zero(core.parameter_count());
    core.init(params, rng);
    std::normal_distribution<double> g(0.0, 0.05);
    for (auto& p : params) p += g(rng);
    Planes<double> x(3, 9, 9);
    x.data = nn::Matrix<double>::Random(3, 81).cwiseAbs();
    const double target = 0.4;

    auto loss = [&](const nn::Vector<double>& p) { return std::pow(core.forward(p, x) - target, 2); };
    SmallCnnCore<double>::Trace trace;
    const double y = core.forward(params, x, trace);
    nn::Vector<double> grads = nn::Vector<double>::Zero(params.size());
    core.backward(params, grads, trace, 2 * (y - target), true);

    nn::Vector<double> numeric(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        nn::Vector<double> p = params;
        p(i) += 1e-6;
        const double up = loss(p);
        p(i) -= 2e-6;
        numeric(i) = (up - loss(p)) / 2e-6;
    }
    CHECK((grads - numeric).norm() / (grads.norm() + numeric.norm()) < 1e-6);

    nn::Vector<double> head_only = nn::Vector<double>::Zero(params.size());
    core.backward(params, head_only, trace, 2 * (y - target), false);
    const Eigen::Index backbone = 3 * 9 * 8 + 8 + 8 * 9 * 16 + 16;
    CHECK(head_only.head(backbone).isZero());
    CHECK(head_only.tail(params.size() - backbone) == grads.tail(params.size() - backbone));
}

TEST_CASE("one small Adam step decreases the batch loss") {
    auto model = build_regressor(RegressorKind::gesture, "small-cnn", 4);
    std::vector<RegressorSample> batch;
    for (int i = 0; i < 8; ++i)
        batch.push_back(model->prepare(make_gesture_input(random_image(90, 120, 100 + i), blob_mask(90, 120)),
                                       0.1f * static_cast<float>(i)));
    const double before = nn::mean_squared_error(std::as_const(*model), std::span<const RegressorSample>(batch));
    model->gradients().setZero();
    for (const auto& s : batch) model->accumulate_gradient(s, 1.0f / 8);
    nn::Adam<float> adam(model->parameters().size());
    adam.step(model->parameters(), model->gradients(), 1e-4);
    const double after = nn::mean_squared_error(std::as_const(*model), std::span<const RegressorSample>(batch));
    CHECK(after < before);
}

TEST_CASE("zero learning rate keeps the loss fixed") {
    auto model = build_regressor(RegressorKind::gesture, "small-cnn", 4);
    std::vector<RegressorSample> batch;
    for (int i = 0; i < 6; ++i)
        batch.push_back(model->prepare(make_gesture_input(random_image(60, 60, i), blob_mask(60, 60)), 0.5f));
    nn::TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    const auto c = train_regressor(*model, batch, {}, cfg);
    for (const auto& m : c.metrics) CHECK(std::abs(m.train_loss - c.metrics.front().train_loss) <= 1e-9);
}

TEST_CASE("checkpoint round-trip predicts bit-identically") {
    auto model = build_regressor(RegressorKind::distance, "small-cnn", 8);
    std::vector<RegressorSample> batch;
    for (int i = 0; i < 4; ++i)
        batch.push_back(model->prepare(make_gesture_input(random_image(60, 80, 50 + i), blob_mask(60, 80)), 0.3f));
    nn::TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 2;
    cfg.seed = 8;
    const auto c = train_regressor(*model, batch, batch, cfg);
    const auto path = std::filesystem::temp_directory_path() / "nvi_test_regressor.ckpt";
    nn::save_checkpoint(c, path);
    const auto back = load_regressor(nn::load_checkpoint(path));
    for (const auto& s : batch) CHECK(back->predict(s) == model->predict(s));
    std::filesystem::remove(path);

    auto tampered = c;
    tampered.weights.conservativeResize(10);
    CHECK_THROWS_AS(load_regressor(tampered), ValidationError);
    tampered = c;
    tampered.kind = "nvi";
    CHECK_THROWS_AS(load_regressor(tampered), ConfigError);
}

TEST_CASE("threshold accuracy") {
    const std::vector<double> same{0.1, 0.5, 0.7, 0.9};
    const auto id = evaluate_predictions(same, same, 0.5);
    CHECK(id.pearson->r == doctest::Approx(1.0));
    CHECK(*id.accuracy == 1.0);

    const std::vector<double> p2{0.2, 0.8}, t2{0.1, 0.9};
    CHECK_FALSE(evaluate_predictions(p2, t2, 0.5).pearson);
    CHECK_FALSE(evaluate_predictions(p2, t2, 0.5).pearson_note.empty());
    CHECK(*evaluate_predictions(p2, t2, 0.5).accuracy == 1.0);

    const std::vector<double> p4{0.2, 0.4, 0.6, 0.9}, t4{0.1, 0.6, 0.4, 0.9};
    CHECK(*evaluate_predictions(p4, t4, 0.5).accuracy == 0.5);
    CHECK_FALSE(evaluate_predictions(p4, t4).accuracy);
    CHECK_THROWS_AS(evaluate_predictions({}, {}, 0.5), ValidationError);
}

TEST_CASE("synthetic gestures are learnable in five epochs, deterministically") {
    auto a = build_regressor(RegressorKind::gesture, "small-cnn", 5);
    auto b = build_regressor(RegressorKind::gesture, "small-cnn", 5);
    const auto frames = synthetic_frames(RegressorKind::gesture, *a, 5, 2);
    nn::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 5;
    const auto ca = train_regressor(*a, frames.train, frames.validation, cfg);
    const auto cb = train_regressor(*b, frames.train, frames.validation, cfg);
    CHECK(ca.metrics == cb.metrics);
    CHECK(ca.weights == cb.weights);
    REQUIRE(ca.metrics.back().validation_r);
    CHECK(*ca.metrics.back().validation_r >= 0.8);
    CHECK(ca.metrics.back().train_loss < ca.metrics.front().train_loss);
}
