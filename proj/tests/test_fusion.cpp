#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "nvi/error.hpp"
#include "nvi/fusion/fusion.hpp"
#include "nvi/fusion/score_table.hpp"
#include "nvi/nn/training.hpp"
#include "nvi/synth/dataset.hpp"

using namespace nvi;
using namespace nvi::fusion;

namespace {

EmotionArray one_hot(int k, double value = 1.0) {
    EmotionArray e = EmotionArray::Zero();
    e(k) = value;
    return e;
}

constexpr int kHappiness = 4;

std::vector<FrameFeatures> random_frames(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<FrameFeatures> frames;
    for (int i = 0; i < n; ++i) {
        FrameFeatures f{u(rng), u(rng), std::nullopt};
        if (u(rng) < 0.7) {
            EmotionArray e;
            for (auto& x : e) x = u(rng);
            f.emotions = e / e.sum();
        }
        frames.push_back(f);
    }
    return frames;
}

}  // namespace

TEST_CASE("aggregation examples") {
    std::vector<FrameFeatures> all(4, FrameFeatures{0.5, 0.2, one_hot(kHappiness)});
    auto v = aggregate_segment(all);
    CHECK(v.gesture == 0.5);
    CHECK(v.emotions(kHappiness) == 1.0);
    CHECK(v.visible_face_frames == 4);
    CHECK(v.total_frames == 4);

    std::vector<FrameFeatures> none(4, FrameFeatures{0.5, 0.2, std::nullopt});
    v = aggregate_segment(none);
    CHECK(v.emotions.isZero());
    CHECK(v.visible_face_frames == 0);

    std::vector<FrameFeatures> half = none;
    half[0].emotions = half[2].emotions = one_hot(kHappiness);
    CHECK(aggregate_segment(half).emotions(kHappiness) == 0.5);
    CHECK(aggregate_segment(half, EmotionWeighting::visible_frames).emotions(kHappiness) == 1.0);
    CHECK(aggregate_segment(none, EmotionWeighting::visible_frames).emotions.isZero());

    CHECK_THROWS_AS(aggregate_segment(std::vector<FrameFeatures>{}), ValidationError);
    std::vector<FrameFeatures> bad(2, FrameFeatures{0.5, std::nan(""), std::nullopt});
    CHECK_THROWS_AS(aggregate_segment(bad), ValidationError);
}

TEST_CASE("aggregation is order and duplication invariant") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        auto frames = random_frames(rng, 1 + trial % 40);
        const auto v = aggregate_segment(frames);
        auto shuffled = frames;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK((aggregate_segment(shuffled).flatten() - v.flatten()).cwiseAbs().maxCoeff() <= 1e-12);
        auto doubled = frames;
        doubled.insert(doubled.end(), frames.begin(), frames.end());
        const auto d = aggregate_segment(doubled);
        CHECK((d.flatten() - v.flatten()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(d.total_frames == 2 * v.total_frames);
        CHECK(d.visible_face_frames == 2 * v.visible_face_frames);
    }
}

TEST_CASE("all-visible emotion dims equal the plain mean") {
    std::mt19937_64 rng(3);
    auto frames = random_frames(rng, 30);
    for (auto& f : frames)
        if (!f.emotions) f.emotions = one_hot(1);
    EmotionArray mean = EmotionArray::Zero();
    for (const auto& f : frames) mean += *f.emotions;
    mean /= 30.0;
    CHECK((aggregate_segment(frames).emotions - mean).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("flattened order and json round-trip") {
    SegmentFeatureVector v;
    v.gesture = 0.1;
    v.distance = 0.2;
    v.emotions = one_hot(7, 0.3);
    v.total_frames = 5;
    v.visible_face_frames = 2;
    const auto x = v.flatten();
    CHECK(x(0) == 0.1);
    CHECK(x(1) == 0.2);
    CHECK(x(9) == 0.3);
    CHECK(kFeatureOrder[9] == "surprise");
    CHECK(feature_vector_from_json(to_json(v)) == v);
}

TEST_CASE("NVI perceptron shape") {
    const Eigen::Index expected = (10 * 300 + 300) + (300 * 100 + 100) + (100 * 10 + 10) + (10 * 1 + 1);
    CHECK(expected == 34421);
    NviModel model(1);
    CHECK(model.parameters().size() == expected);
    CHECK(NviModel::closed_form_parameter_count() == expected);

    NviSample zero{Eigen::Matrix<float, 10, 1>::Zero(), 0.0f};
    CHECK(std::isfinite(model.predict(zero)));
    NviSample x{Eigen::Matrix<float, 10, 1>::LinSpaced(0.0f, 1.0f), 0.0f};
    CHECK(NviModel(7).predict(x) == NviModel(7).predict(x));
    CHECK(NviModel(7).predict(x) != NviModel(8).predict(x));
}

TEST_CASE("NVI gradient matches finite differences") {
    NviModel model(2);
    NviSample s{Eigen::Matrix<float, 10, 1>::LinSpaced(0.1f, 0.9f), 0.7f};
    model.gradients().setZero();
    model.accumulate_gradient(s, 1.0f);
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<Eigen::Index> pick(0, model.parameters().size() - 1);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 40; ++trial) {
        const auto i = pick(rng);
        const float keep = model.parameters()(i);
        const float h = 1e-2f;
        model.parameters()(i) = keep + h;
        const double up = std::pow(double(model.predict(s)) - s.target, 2);
        model.parameters()(i) = keep - h;
        const double down = std::pow(double(model.predict(s)) - s.target, 2);
        model.parameters()(i) = keep;
        const double numeric = (up - down) / (2 * h);
        if (std::abs(numeric) < 1e-3) continue;
        CHECK(model.gradients()(i) == doctest::Approx(numeric).epsilon(0.05));
        ++checked;
    }
    CHECK(checked >= 20);
}

TEST_CASE("one small step decreases the NVI loss") {
    const auto set = synth::linear_fusion_set(64, 2);
    std::vector<NviSample> batch;
    for (std::size_t i = 0; i < set.features.size(); ++i)
        batch.push_back({set.features[i].cast<float>(), static_cast<float>(set.targets[i])});
    NviModel model(3);
    const double before = nn::mean_squared_error(std::as_const(model), std::span<const NviSample>(batch));
    model.gradients().setZero();
    for (const auto& s : batch) model.accumulate_gradient(s, 1.0f / 64);
    nn::Adam<float> adam(model.parameters().size());
    adam.step(model.parameters(), model.gradients(), 1e-4);
    CHECK(nn::mean_squared_error(std::as_const(model), std::span<const NviSample>(batch)) < before);
}

TEST_CASE("NVI perceptron learns the synthetic linear target") {
    const auto train = synth::linear_fusion_set(400, 10);
    const auto val = synth::linear_fusion_set(100, 11);
    auto samples = [](const synth::LinearFusionSet& s) {
        std::vector<NviSample> out;
        for (std::size_t i = 0; i < s.features.size(); ++i)
            out.push_back({s.features[i].cast<float>(), static_cast<float>(s.targets[i])});
        return out;
    };
    const auto tr = samples(train), va = samples(val);
    nn::TrainConfig cfg;
    cfg.seed = 10;
    NviModel a(cfg.seed), b(cfg.seed);
    const auto ca = train_nvi(a, tr, va, cfg);
    const auto cb = train_nvi(b, tr, va, cfg);
    CHECK(ca.metrics == cb.metrics);
    REQUIRE(ca.metrics.back().validation_r);
    CHECK(*ca.metrics.back().validation_r >= 0.6);

    // Predictions land near the generator's target.
    const NviPredictor predictor(ca);
    SegmentFeatureVector v;
    v.gesture = val.features[0](0);
    v.distance = val.features[0](1);
    v.emotions = val.features[0].tail<8>();
    v.total_frames = 10;
    v.visible_face_frames = 10;
    CHECK(std::abs(predictor.predict(v) / 10000.0 - synth::nvi_truth(val.features[0])) < 0.1);
}

TEST_CASE("a single training sample is memorised") {
    std::vector<NviSample> one{{Eigen::Matrix<float, 10, 1>::Constant(0.3f), 0.6f}};
    NviModel model(5);
    nn::TrainConfig cfg;
    cfg.epochs = 300;
    const auto c = train_nvi(model, one, {}, cfg);
    CHECK(c.metrics.back().train_loss < 1e-6);
}

TEST_CASE("NVI prediction validates its input") {
    NviModel model(6);
    nn::TrainConfig cfg;
    cfg.epochs = 1;
    std::vector<NviSample> one{{Eigen::Matrix<float, 10, 1>::Constant(0.3f), 0.6f}};
    const auto c = train_nvi(model, one, {}, cfg);

    SegmentFeatureVector v;
    v.total_frames = 3;
    const double first = predict_nvi(c, v);
    CHECK(predict_nvi(c, v) == first);
    CHECK(first == doctest::Approx(model.predict(make_nvi_sample(v)) * 10000.0));

    auto bad = v;
    bad.distance = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(predict_nvi(c, bad), ValidationError);
    bad = v;
    bad.layout_version = 2;
    CHECK_THROWS_AS(predict_nvi(c, bad), ValidationError);
    bad = v;
    bad.weighting = EmotionWeighting::visible_frames;
    CHECK_THROWS_AS(predict_nvi(c, bad), ValidationError);

    const auto path = std::filesystem::temp_directory_path() / "nvi_test_fusion.ckpt";
    nn::save_checkpoint(c, path);
    CHECK(predict_nvi(nn::load_checkpoint(path), v) == first);
    std::filesystem::remove(path);
}

TEST_CASE("NVI dataset keeps low-quality samples out of training only") {
    data::DatasetManifest m;
    m.segments = {{"A", "T1", "V1", 0, 30, "a", data::Split::train, std::nullopt},
                  {"B", "T1", "V1", 30, 30, "b", data::Split::train, std::nullopt},
                  {"C", "T2", "V2", 0, 30, "c", data::Split::validation, std::nullopt},
                  {"D", "T3", "V3", 0, 30, "d", data::Split::external, std::nullopt}};
    auto label = [](std::string id, bool low) {
        return data::SegmentLabelRecord{id, {id, data::Construct::nvi, {4000, 5000, 6000}, {"N1", "N2", "N3"}}, low};
    };
    m.segment_labels = {label("A", false), label("B", true), label("C", true), label("D", false)};
    SegmentFeatureVector v;
    v.total_frames = 1;
    std::map<std::string, SegmentFeatureVector> features{{"A", v}, {"B", v}, {"C", v}};
    const auto ds = build_nvi_dataset(m, features, nn::TrainConfig{});
    CHECK(ds.train_ids == std::vector<std::string>{"A"});
    CHECK(ds.validation_ids == std::vector<std::string>{"C"});
    CHECK(ds.low_quality_excluded == 1);
    CHECK(ds.train[0].target == doctest::Approx(0.5));

    features.erase("A");
    CHECK_THROWS_WITH_AS(build_nvi_dataset(m, features, nn::TrainConfig{}), doctest::Contains("A"), ValidationError);
}

TEST_CASE("score table round-trip") {
    const std::vector<ScoreRow> rows{{"S1", "T1", "V1", data::Split::train, 5123.456789},
                                     {"S2", "T2", "V2", data::Split::external, 0.1}};
    const auto path = std::filesystem::temp_directory_path() / "nvi_test_scores.csv";
    write_score_table(rows, path);
    CHECK(read_score_table(path) == rows);
    {
        std::ofstream out(path, std::ios::app);
        out << "S3,T3,V3,train,abc\n";
    }
    CHECK_THROWS_AS(read_score_table(path), ParseError);
    std::filesystem::remove(path);
}
