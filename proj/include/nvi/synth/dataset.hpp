#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nvi/data/types.hpp"
#include "nvi/synth/scene.hpp"

namespace nvi::synth {

/// Segment features in fusion order: gesture, distance, then the eight
/// emotions in kEmotionNames order.
using FeatureVector = Eigen::Matrix<double, 10, 1>;

/// The linear law behind synthetic NVI labels (normalised scale, clamped to
/// [0, 1]).
double nvi_truth(const FeatureVector& features);

/// Ground-truth segment features: mean gesture, mean distance and the
/// visible-face emotion confidences summed and divided by the frame count.
FeatureVector true_segment_features(const SceneParams& params);

struct LinearFusionSet {
    std::vector<FeatureVector> features;
    std::vector<double> targets;
};

/// Random plausible segment vectors with nvi_truth targets plus Gaussian
/// noise of standard deviation `noise_sd`.
LinearFusionSet linear_fusion_set(int n, std::uint64_t seed, double noise_sd = 0.03);

/// n pairs from a standard bivariate normal with correlation rho.
std::pair<std::vector<double>, std::vector<double>> correlated_normals(int n, double rho, std::mt19937_64& rng);

struct SynthDatasetOptions {
    std::uint64_t seed = 1;
    int train_teachers = 6;
    int validation_teachers = 2;
    int external_teachers = 4;
    int videos_per_teacher = 1;
    int segments_per_video = 3;
    double fps = 1.0;
    double segment_duration = 30.0;
    /// Evenly spaced labelled frames per segment (capped at the frame count).
    int labelled_frames_per_segment = 30;
    int width = 120;
    int height = 120;
    double scale_max = 10000.0;
    double rater_bias_sd = 150.0;
    double rater_noise_sd = 350.0;
    /// Share of items rated with `hard_noise_sd` instead.
    double hard_item_fraction = 0.1;
    double hard_noise_sd = 2500.0;
    double low_quality_fraction = 0.0;
    double measure_correlation = 0.5;
};

inline constexpr std::array<const char*, 3> kTeacherMeasures = {"interest_math", "cognitive_activation",
                                                               "perceived_enthusiasm"};
inline constexpr const char* kVideoMeasure = "socio_emotional_support";

struct SynthDataset {
    data::DatasetManifest manifest;
    /// Scene for each manifest segment, same order.
    std::vector<SceneParams> scenes;
    std::vector<FeatureVector> segment_features;
    std::vector<double> segment_nvi;  // normalised truth
    /// teacher_id -> the three teacher-level measures.
    std::map<std::string, std::array<double, 3>> teacher_measures;
    /// video_id -> socio-emotional support.
    std::map<std::string, double> video_measures;
};

SynthDataset make_synthetic_dataset(const SynthDatasetOptions& options);

/// Writes manifest.jsonl, scenes/<segment>.scene.json,
/// measures_teacher.csv and measures_video.csv into `dir`.
void write_synthetic_dataset(const SynthDataset& dataset, const std::filesystem::path& dir);

}  // namespace nvi::synth
