#pragma once
// Independent reference computations used by the unit and acceptance suites.
// None of these call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// ICC(2,k) from explicit double-loop sums of squares, SSE taken as the
/// remainder SST - SSR - SSC.
inline double icc2k(const Eigen::MatrixXd& x) {
    const long n = x.rows();
    const long k = x.cols();
    double grand = 0.0;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < k; ++j) grand += x(i, j);
    grand /= static_cast<double>(n * k);

    double ssr = 0.0;
    for (long i = 0; i < n; ++i) {
        double m = 0.0;
        for (long j = 0; j < k; ++j) m += x(i, j);
        m /= static_cast<double>(k);
        ssr += static_cast<double>(k) * (m - grand) * (m - grand);
    }
    double ssc = 0.0;
    for (long j = 0; j < k; ++j) {
        double m = 0.0;
        for (long i = 0; i < n; ++i) m += x(i, j);
        m /= static_cast<double>(n);
        ssc += static_cast<double>(n) * (m - grand) * (m - grand);
    }
    double sst = 0.0;
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < k; ++j) sst += (x(i, j) - grand) * (x(i, j) - grand);
    const double sse = sst - ssr - ssc;

    const double msr = ssr / static_cast<double>(n - 1);
    const double msc = ssc / static_cast<double>(k - 1);
    const double mse = sse / static_cast<double>((n - 1) * (k - 1));
    return (msr - mse) / (msr + (msc - mse) / static_cast<double>(n));
}

/// Pearson r from the raw-moment form n*Sxy - Sx*Sy over the root of the
/// corresponding variance terms, accumulated in long double.
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const long double n = static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double num = n * sxy - sx * sy;
    const long double den = std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
    return static_cast<double>(num / den);
}

/// Benjamini-Hochberg by the definition q_(i) = min_{j >= i} m p_(j) / j,
/// quadratic in m.
inline std::vector<double> bh_step_up(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<double> out(m);
    for (std::size_t a = 0; a < m; ++a) {
        // rank of p[a] among all values (ties broken by index)
        double best = 1.0;
        for (std::size_t b = 0; b < m; ++b) {
            std::size_t rank_b = 1;
            for (std::size_t c = 0; c < m; ++c)
                if (p[c] < p[b] || (p[c] == p[b] && c < b)) ++rank_b;
            std::size_t rank_a = 1;
            for (std::size_t c = 0; c < m; ++c)
                if (p[c] < p[a] || (p[c] == p[a] && c < a)) ++rank_a;
            if (rank_b >= rank_a) best = std::min(best, p[b] * static_cast<double>(m) / static_cast<double>(rank_b));
        }
        out[a] = best;
    }
    return out;
}

/// Sample standard deviation via the textbook two-pass formula over any
/// sample size.
inline double sample_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace oracle
