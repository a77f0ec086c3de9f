#include "nvi/synth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "nvi/data/manifest.hpp"
#include "nvi/error.hpp"
#include "nvi/perception/synthetic.hpp"

namespace nvi::synth {
namespace {

using data::Construct;
using data::RatingTriple;

constexpr int kEmotions = perception::kEmotionCount;

std::string format_id(const char* pattern, int a, int b = 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

struct RaterPanel {
    std::array<std::string, 3> ids;
    std::array<double, 3> bias{};
};

RaterPanel make_panel(const char* prefix, double bias_sd, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, bias_sd);
    RaterPanel p;
    for (int j = 0; j < 3; ++j) {
        p.ids[j] = std::string(prefix) + std::to_string(j + 1);
        p.bias[j] = g(rng);
    }
    return p;
}

RatingTriple rate(const std::string& item, Construct construct, double truth, const RaterPanel& panel,
                  const SynthDatasetOptions& o, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double sd = u(rng) < o.hard_item_fraction ? o.hard_noise_sd : o.rater_noise_sd;
    std::normal_distribution<double> noise(0.0, sd);
    RatingTriple t;
    t.item_id = item;
    t.construct = construct;
    t.rater_ids = panel.ids;
    for (int j = 0; j < 3; ++j)
        t.values[j] = std::round(std::clamp(truth * o.scale_max + panel.bias[j] + noise(rng), 0.0, o.scale_max));
    return t;
}

// z-scores of `values`, or zeros when they do not vary.
std::vector<double> standardise(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / std::max(1.0, n - 1));
    std::vector<double> z;
    for (double v : values) z.push_back(sd > 0 ? (v - mean) / sd : 0.0);
    return z;
}

// Likert-like 1..4 scale.
double likert(double z) { return std::clamp(2.5 + 0.5 * z, 1.0, 4.0); }

}  // namespace

double nvi_truth(const FeatureVector& x) {
    static const FeatureVector w = (FeatureVector() << 0.55, -0.35,  // gesture, distance
                                    -0.20, -0.05, -0.10, -0.10,      // anger, contempt, disgust, fear
                                    0.30, 0.05, -0.10, 0.10)         // happiness, neutral, sadness, surprise
                                       .finished();
    return std::clamp(0.30 + w.dot(x), 0.0, 1.0);
}

FeatureVector true_segment_features(const SceneParams& params) {
    params.validate();
    FeatureVector f = FeatureVector::Zero();
    for (int t = 0; t < params.n_frames; ++t) {
        const auto truth = frame_truth(params, t);
        f(0) += truth.gesture;
        f(1) += truth.distance;
        if (truth.emotion) f.tail<kEmotions>() += perception::synthetic::emotion_confidences(*truth.emotion).cast<double>();
    }
    return f / params.n_frames;
}

LinearFusionSet linear_fusion_set(int n, std::uint64_t seed, double noise_sd) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, noise_sd);
    LinearFusionSet set;
    for (int i = 0; i < n; ++i) {
        FeatureVector x;
        x(0) = 0.1 + 0.8 * u(rng);
        x(1) = 0.05 + 0.95 * u(rng);
        Eigen::Matrix<double, kEmotions, 1> e;
        for (int k = 0; k < kEmotions; ++k) e(k) = -std::log(1.0 - u(rng));
        x.tail<kEmotions>() = e / e.sum() * (0.3 + 0.7 * u(rng));
        set.features.push_back(x);
        set.targets.push_back(nvi_truth(x) + noise(rng));
    }
    return set;
}

std::pair<std::vector<double>, std::vector<double>> correlated_normals(int n, double rho, std::mt19937_64& rng) {
    if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("correlation must lie in [-1, 1]");
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x, y;
    for (int i = 0; i < n; ++i) {
        const double a = g(rng), b = g(rng);
        x.push_back(a);
        y.push_back(rho * a + std::sqrt(1.0 - rho * rho) * b);
    }
    return {x, y};
}

SynthDataset make_synthetic_dataset(const SynthDatasetOptions& o) {
    if (o.train_teachers < 1 || o.validation_teachers < 0 || o.external_teachers < 0)
        throw ValidationError("synthetic dataset needs at least one training teacher");
    if (o.videos_per_teacher < 1 || o.segments_per_video < 1)
        throw ValidationError("synthetic dataset needs at least one video and segment per teacher");
    if (!(o.fps > 0.0) || !(o.segment_duration > 0.0)) throw ValidationError("fps and segment_duration must be positive");
    if (o.labelled_frames_per_segment < 0) throw ValidationError("labelled_frames_per_segment must be >= 0");

    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const RaterPanel gesture_panel = make_panel("G", o.rater_bias_sd, rng);
    const RaterPanel distance_panel = make_panel("D", o.rater_bias_sd, rng);
    const RaterPanel nvi_panel = make_panel("N", o.rater_bias_sd, rng);

    SynthDataset ds;
    auto& m = ds.manifest;
    m.scale_max = o.scale_max;
    m.fps = o.fps;
    m.segment_duration = o.segment_duration;
    const int frames = static_cast<int>(std::lround(o.segment_duration * o.fps));
    if (frames < 1) throw ValidationError("segments must span at least one frame");
    const int labelled = std::min(frames, o.labelled_frames_per_segment);

    RandomSceneOptions scene_opts;
    scene_opts.n_frames = frames;
    scene_opts.width = o.width;
    scene_opts.height = o.height;
    scene_opts.fps = o.fps;

    const int teachers = o.train_teachers + o.validation_teachers + o.external_teachers;
    int segment_no = 0;
    std::map<std::string, std::vector<double>> teacher_nvi, video_nvi;
    for (int t = 0; t < teachers; ++t) {
        const auto split = t < o.train_teachers ? data::Split::train
                           : t < o.train_teachers + o.validation_teachers ? data::Split::validation
                                                                         : data::Split::external;
        const std::string teacher = format_id("T%02d", t + 1);
        for (int v = 0; v < o.videos_per_teacher; ++v) {
            const std::string video = format_id("T%02d_V%d", t + 1, v + 1);
            for (int s = 0; s < o.segments_per_video; ++s) {
                ++segment_no;
                data::SegmentRecord seg;
                seg.segment_id = format_id("seg_%04d", segment_no);
                seg.teacher_id = teacher;
                seg.video_id = video;
                seg.start = s * o.segment_duration;
                seg.duration = o.segment_duration;
                seg.source_path = "scenes/" + seg.segment_id + ".scene.json";
                seg.split = split;

                const auto scene = random_scene(o.seed * 1000003ULL + static_cast<std::uint64_t>(segment_no), scene_opts);
                seg.teacher_box = initial_teacher_box(scene);

                for (int i = 0; i < labelled; ++i) {
                    const int idx = static_cast<int>(static_cast<long>(i) * frames / labelled);
                    const auto truth = frame_truth(scene, idx);
                    data::FrameLabelRecord f;
                    f.frame_id = seg.segment_id + format_id("_f%03d", idx);
                    f.segment_id = seg.segment_id;
                    f.frame_index = idx;
                    f.gesture = rate(f.frame_id, Construct::gesture_intensity, truth.gesture, gesture_panel, o, rng);
                    f.distance = rate(f.frame_id, Construct::perceived_distance, truth.distance, distance_panel, o, rng);
                    m.frame_labels.push_back(std::move(f));
                }

                const auto features = true_segment_features(scene);
                const double nvi = nvi_truth(features);
                data::SegmentLabelRecord label;
                label.segment_id = seg.segment_id;
                label.rating = rate(seg.segment_id, Construct::nvi, nvi, nvi_panel, o, rng);
                label.low_quality = u(rng) < o.low_quality_fraction;
                m.segment_labels.push_back(label);

                teacher_nvi[teacher].push_back(nvi);
                video_nvi[video].push_back(nvi);
                ds.segment_features.push_back(features);
                ds.segment_nvi.push_back(nvi);
                ds.scenes.push_back(scene);
                m.segments.push_back(std::move(seg));
            }
        }
    }
    data::validate_manifest(m);

    auto means = [](const std::map<std::string, std::vector<double>>& groups) {
        std::vector<std::string> keys;
        std::vector<double> values;
        for (const auto& [k, v] : groups) {
            keys.push_back(k);
            values.push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
        }
        return std::pair{keys, standardise(values)};
    };
    std::normal_distribution<double> g(0.0, 1.0);
    const double rho = o.measure_correlation;
    const double resid = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const auto [teacher_keys, teacher_z] = means(teacher_nvi);
    for (std::size_t i = 0; i < teacher_keys.size(); ++i) {
        std::array<double, 3> row{};
        for (auto& v : row) v = likert(rho * teacher_z[i] + resid * g(rng));
        ds.teacher_measures[teacher_keys[i]] = row;
    }
    const auto [video_keys, video_z] = means(video_nvi);
    for (std::size_t i = 0; i < video_keys.size(); ++i) ds.video_measures[video_keys[i]] = likert(rho * video_z[i] + resid * g(rng));
    return ds;
}

void write_synthetic_dataset(const SynthDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "scenes");
    for (std::size_t i = 0; i < ds.scenes.size(); ++i)
        save_scene(ds.scenes[i], dir / ds.manifest.segments[i].source_path);
    data::save_manifest(ds.manifest, dir / "manifest.jsonl");

    std::ofstream teacher(dir / "measures_teacher.csv");
    teacher << "teacher_id";
    for (const char* name : kTeacherMeasures) teacher << ',' << name;
    teacher << '\n';
    char buf[32];
    for (const auto& [id, row] : ds.teacher_measures) {
        teacher << id;
        for (double v : row) {
            std::snprintf(buf, sizeof buf, "%.6f", v);
            teacher << ',' << buf;
        }
        teacher << '\n';
    }
    std::ofstream video(dir / "measures_video.csv");
    video << "video_id," << kVideoMeasure << '\n';
    for (const auto& [id, v] : ds.video_measures) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        video << id << ',' << buf << '\n';
    }
    if (!teacher || !video) throw Error("failed writing measures into '" + dir.string() + "'");
}

}  // namespace nvi::synth
