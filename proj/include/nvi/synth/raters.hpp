#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nvi/stats/rater_matrix.hpp"

namespace nvi::synth {

struct RaterPanelParams {
    int n_items = 100;
    double true_score_variance = 1.0;
    double rater_bias_variance = 0.0;
    double noise_variance = 1.0;
    int k_raters = 3;
    std::uint64_t seed = 0;
    double scale_max = 10000.0;

    void validate() const;
};

/// n_items true scores ~ N(scale_max / 2, true_score_variance).
std::vector<double> draw_true_scores(const RaterPanelParams& params);

/// rating(i, j) = truth_i + bias_j + noise_ij, clipped to [0, scale_max].
/// Columns are named Rater0 .. Rater{k-1}; items are item0000, item0001, ...
stats::RaterMatrix simulate_raters(std::span<const double> truth, const RaterPanelParams& params);

}  // namespace nvi::synth
