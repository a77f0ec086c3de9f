#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "nvi/data/types.hpp"

namespace nvi::stats {

struct CorrelationResult {
    double r = 0.0;
    double p_raw = 1.0;
    std::size_t n = 0;
};

/// Pearson product-moment correlation with a two-sided t-test p-value
/// (n - 2 degrees of freedom).
///
/// Throws ValidationError on length mismatch or n < 3 and
/// UndefinedStatisticError when either input has zero variance.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

template <typename DerivedX, typename DerivedY>
CorrelationResult pearson(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
    const Eigen::VectorXd xs = x.derived().template cast<double>();
    const Eigen::VectorXd ys = y.derived().template cast<double>();
    return pearson(std::span<const double>(xs.data(), static_cast<std::size_t>(xs.size())),
                   std::span<const double>(ys.data(), static_cast<std::size_t>(ys.size())));
}

/// p-value of a correlation coefficient under H0: rho = 0.
double correlation_p_value(double r, std::size_t n);

/// Mean squares of a two-way ANOVA without replication
/// (rows = subjects, columns = raters).
struct MeanSquares {
    double rows = 0.0;
    double columns = 0.0;
    double error = 0.0;
};

MeanSquares two_way_mean_squares(const Eigen::Ref<const Eigen::MatrixXd>& ratings);

struct IccResult {
    static constexpr std::string_view model =
        "ICC(2,k) two-way random, average measures, absolute agreement";

    double value = 0.0;
    Eigen::Index n_subjects = 0;
    Eigen::Index k_raters = 0;
};

/// ICC(2,k): (MSR - MSE) / (MSR + (MSC - MSE) / n).
///
/// Requires n >= 2 subjects, k >= 2 raters and no NaN cells. A zero
/// denominator raises UndefinedStatisticError.
IccResult icc2k(const Eigen::Ref<const Eigen::MatrixXd>& ratings);

double median_rating(const data::RatingTriple& triple);

/// Sample standard deviation (divisor n - 1) of the three ratings.
double rating_spread(const data::RatingTriple& triple);

struct DisagreementSplit {
    std::vector<data::RatingTriple> kept;
    std::vector<data::RatingTriple> excluded;
};

/// Excludes every triple whose sample standard deviation is >= sigma_max.
/// Input order is preserved in both outputs.
DisagreementSplit filter_by_disagreement(std::span<const data::RatingTriple> labels, double sigma_max);

/// True when the triple counts as rater disagreement at `sigma_max`.
bool is_disagreement(const data::RatingTriple& triple, double sigma_max);

/// Benjamini-Hochberg step-up adjusted p-values, aligned with the input.
std::vector<double> fdr_adjust(std::span<const double> p_values);

/// Median of an arbitrary sample; even counts average the middle pair.
double median(std::vector<double> values);

}  // namespace nvi::stats
