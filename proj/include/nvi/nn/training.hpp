#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nvi/error.hpp"
#include "nvi/stats/stats.hpp"

namespace nvi::nn {

/// Hyperparameters shared by every trained model.
struct TrainConfig {
    double learning_rate = 1e-3;
    std::string optimizer = "adam";
    std::string loss = "mse";
    int epochs = 30;
    int batch_size = 32;
    std::uint64_t seed = 0;
    /// Rater-disagreement threshold in raw rating units.
    double sigma_max = 1600.0;
    /// Targets are divided by this before training.
    double scale_max = 10000.0;
    /// When false only the regression head is updated.
    bool fine_tune_backbone = true;

    void validate() const;
    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> validation_loss;
    std::optional<double> validation_r;

    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

template <typename Scalar>
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit Adam(Eigen::Index size)
        : m_(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(size)),
          v_(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(size)) {}

    void step(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grads, double learning_rate) {
        ++t_;
        const auto b1 = static_cast<Scalar>(beta1);
        const auto b2 = static_cast<Scalar>(beta2);
        m_ = b1 * m_ + (Scalar(1) - b1) * grads;
        v_ = b2 * v_ + (Scalar(1) - b2) * grads.cwiseAbs2();
        const auto c1 = static_cast<Scalar>(1.0 - std::pow(beta1, t_));
        const auto c2 = static_cast<Scalar>(1.0 - std::pow(beta2, t_));
        params.array() -= static_cast<Scalar>(learning_rate) * (m_.array() / c1) /
                          ((v_.array() / c2).sqrt() + static_cast<Scalar>(epsilon));
    }

    long steps() const { return t_; }

private:
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> m_;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v_;
    long t_ = 0;
};

/// A model trainable by `fit`: flat parameter and gradient buffers, a
/// per-sample forward/backward that adds `scale * d(squared error)/d(theta)`
/// into the gradient buffer, and a const prediction.
template <typename Model, typename Sample>
concept Trainable = requires(Model& m, const Model& cm, const Sample& s, float scale) {
    { m.parameters() } -> std::same_as<Eigen::VectorXf&>;
    { m.gradients() } -> std::same_as<Eigen::VectorXf&>;
    { m.accumulate_gradient(s, scale) } -> std::convertible_to<double>;
    { cm.predict(s) } -> std::convertible_to<double>;
    { s.target } -> std::convertible_to<double>;
};

/// Mean squared error of `model` over `samples`, accumulated in fixed order.
template <typename Model, typename Sample>
double mean_squared_error(const Model& model, std::span<const Sample> samples) {
    double total = 0.0;
    for (const auto& s : samples) {
        const double e = static_cast<double>(model.predict(s)) - static_cast<double>(s.target);
        total += e * e;
    }
    return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

/// Minibatch Adam on mean squared error. Data order per epoch is a seeded
/// permutation, so results are a pure function of (model init, data, config).
/// Metrics are measured after each epoch: training MSE over the whole
/// training set and, when validation data is given, validation MSE and the
/// Pearson r between predictions and targets.
template <typename Model, typename Sample>
    requires Trainable<Model, Sample>
std::vector<EpochMetrics> fit(Model& model, std::span<const Sample> train, std::span<const Sample> validation,
                              const TrainConfig& config) {
    config.validate();
    if (train.empty()) throw ValidationError("cannot train on an empty dataset");

    Adam<float> optimizer(model.parameters().size());
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<EpochMetrics> history;
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
            const std::size_t stop = std::min(order.size(), start + batch);
            const float scale = 1.0f / static_cast<float>(stop - start);
            model.gradients().setZero();
            double batch_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i)
                batch_loss += model.accumulate_gradient(train[order[i]], scale);
            if (!std::isfinite(batch_loss) || !model.gradients().allFinite())
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(b) + " (batch loss " + std::to_string(batch_loss) +
                                    ", learning rate " + std::to_string(config.learning_rate) + ")");
            optimizer.step(model.parameters(), model.gradients(), config.learning_rate);
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = mean_squared_error(std::as_const(model), train);
        if (!std::isfinite(m.train_loss))
            throw TrainingError("non-finite training loss after epoch " + std::to_string(epoch));
        if (!validation.empty()) {
            std::vector<double> preds, targets;
            preds.reserve(validation.size());
            targets.reserve(validation.size());
            double se = 0.0;
            for (const auto& s : validation) {
                preds.push_back(static_cast<double>(std::as_const(model).predict(s)));
                targets.push_back(static_cast<double>(s.target));
                se += (preds.back() - targets.back()) * (preds.back() - targets.back());
            }
            m.validation_loss = se / static_cast<double>(validation.size());
            try {
                m.validation_r = stats::pearson(preds, targets).r;
            } catch (const Error&) {
                m.validation_r.reset();  // constant predictions or < 3 samples
            }
        }
        history.push_back(m);
    }
    return history;
}

}  // namespace nvi::nn
