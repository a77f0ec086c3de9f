#include "nvi/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nvi/error.hpp"
#include "nvi/stats/special.hpp"

namespace nvi::stats {

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ValidationError("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()) + ")");
    const std::size_t n = x.size();
    if (n < 3) throw ValidationError("pearson: need at least 3 samples, got " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw ValidationError("pearson: non-finite value at index " + std::to_string(i));

    const auto [x_min, x_max] = std::minmax_element(x.begin(), x.end());
    const auto [y_min, y_max] = std::minmax_element(y.begin(), y.end());
    if (*x_min == *x_max || *y_min == *y_max)
        throw UndefinedStatisticError("pearson: zero-variance input");

    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    return {r, correlation_p_value(r, n), n};
}

double correlation_p_value(double r, std::size_t n) {
    if (n < 3) throw ValidationError("correlation_p_value: need n >= 3");
    if (std::fabs(r) >= 1.0) return 0.0;
    const double df = static_cast<double>(n) - 2.0;
    const double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_sided(t, df);
}

MeanSquares two_way_mean_squares(const Eigen::Ref<const Eigen::MatrixXd>& ratings) {
    const Eigen::Index n = ratings.rows();
    const Eigen::Index k = ratings.cols();
    if (n < 2 || k < 2)
        throw ValidationError("two-way ANOVA needs at least 2 subjects and 2 raters, got " +
                              std::to_string(n) + "x" + std::to_string(k));
    if (ratings.hasNaN()) throw ValidationError("rating matrix has missing (NaN) cells");

    const double grand = ratings.mean();
    const Eigen::VectorXd row_means = ratings.rowwise().mean();
    const Eigen::RowVectorXd col_means = ratings.colwise().mean();

    const double ss_rows = static_cast<double>(k) * (row_means.array() - grand).square().sum();
    const double ss_cols = static_cast<double>(n) * (col_means.array() - grand).square().sum();
    const Eigen::MatrixXd residual =
        (ratings.colwise() - row_means).rowwise() - col_means + Eigen::MatrixXd::Constant(n, k, grand);
    const double ss_error = residual.squaredNorm();

    return {ss_rows / static_cast<double>(n - 1), ss_cols / static_cast<double>(k - 1),
            ss_error / static_cast<double>((n - 1) * (k - 1))};
}

IccResult icc2k(const Eigen::Ref<const Eigen::MatrixXd>& ratings) {
    const MeanSquares ms = two_way_mean_squares(ratings);
    const double n = static_cast<double>(ratings.rows());
    const double denominator = ms.rows + (ms.columns - ms.error) / n;
    if (denominator == 0.0)
        throw UndefinedStatisticError("ICC(2,k) undefined: zero denominator (no subject or rater variance)");
    return {(ms.rows - ms.error) / denominator, ratings.rows(), ratings.cols()};
}

double median_rating(const data::RatingTriple& triple) {
    auto v = triple.values;
    std::sort(v.begin(), v.end());
    return v[1];
}

double rating_spread(const data::RatingTriple& triple) {
    const auto& v = triple.values;
    const double mean = (v[0] + v[1] + v[2]) / 3.0;
    const double ss = (v[0] - mean) * (v[0] - mean) + (v[1] - mean) * (v[1] - mean) +
                      (v[2] - mean) * (v[2] - mean);
    return std::sqrt(ss / 2.0);
}

bool is_disagreement(const data::RatingTriple& triple, double sigma_max) {
    return rating_spread(triple) >= sigma_max;
}

DisagreementSplit filter_by_disagreement(std::span<const data::RatingTriple> labels, double sigma_max) {
    if (!(sigma_max > 0.0)) throw ValidationError("filter_by_disagreement: sigma_max must be positive");
    DisagreementSplit out;
    for (const auto& triple : labels)
        (is_disagreement(triple, sigma_max) ? out.excluded : out.kept).push_back(triple);
    return out;
}

std::vector<double> fdr_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (std::size_t i = 0; i < m; ++i)
        if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0))
            throw ValidationError("fdr_adjust: p-value out of [0, 1] at index " + std::to_string(i));

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t rank = m; rank >= 1; --rank) {
        const std::size_t idx = order[rank - 1];
        // m / rank >= 1; the max guards against rounding below the raw value.
        const double candidate =
            std::max(p_values[idx], p_values[idx] * static_cast<double>(m) / static_cast<double>(rank));
        running = std::min(running, candidate);
        adjusted[idx] = running;
    }
    return adjusted;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace nvi::stats
