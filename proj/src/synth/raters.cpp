#include "nvi/synth/raters.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "nvi/error.hpp"

namespace nvi::synth {

void RaterPanelParams::validate() const {
    if (n_items < 1) throw ValidationError("rater panel: n_items must be >= 1");
    if (!(true_score_variance >= 0.0) || !(rater_bias_variance >= 0.0) || !(noise_variance >= 0.0))
        throw ValidationError("rater panel: variances must be non-negative");
    if (k_raters < 2) throw ValidationError("rater panel: k_raters must be >= 2");
    if (!(scale_max > 0.0)) throw ValidationError("rater panel: scale_max must be positive");
}

std::vector<double> draw_true_scores(const RaterPanelParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> g(params.scale_max / 2, std::sqrt(params.true_score_variance));
    std::vector<double> truth(static_cast<std::size_t>(params.n_items));
    for (auto& t : truth) t = g(rng);
    return truth;
}

stats::RaterMatrix simulate_raters(std::span<const double> truth, const RaterPanelParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> bias(0.0, std::sqrt(params.rater_bias_variance));
    std::normal_distribution<double> noise(0.0, std::sqrt(params.noise_variance));

    stats::RaterMatrix m;
    m.values.resize(static_cast<Eigen::Index>(truth.size()), params.k_raters);
    for (int j = 0; j < params.k_raters; ++j) m.columns.push_back("Rater" + std::to_string(j));
    std::vector<double> biases(static_cast<std::size_t>(params.k_raters));
    for (auto& b : biases) b = bias(rng);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "item%04zu", i);
        m.item_ids.emplace_back(id);
        for (int j = 0; j < params.k_raters; ++j)
            m.values(static_cast<Eigen::Index>(i), j) =
                std::clamp(truth[i] + biases[static_cast<std::size_t>(j)] + noise(rng), 0.0, params.scale_max);
    }
    return m;
}

}  // namespace nvi::synth
