#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "nvi/error.hpp"
#include "nvi/stats/special.hpp"
#include "nvi/stats/stats.hpp"
#include "oracles.hpp"

using namespace nvi;
using namespace nvi::stats;
using doctest::Approx;

namespace {

data::RatingTriple triple(double a, double b, double c) {
    data::RatingTriple t;
    t.item_id = "item";
    t.values = {a, b, c};
    t.rater_ids = {"r0", "r1", "r2"};
    return t;
}

// Two-sided permutation p-value for Pearson r (exhaustive over all orderings
// of y, so n must stay tiny).
double permutation_p(std::vector<double> x, std::vector<double> y) {
    const double observed = std::fabs(oracle::pearson_r(x, y));
    std::sort(y.begin(), y.end());
    std::size_t extreme = 0, total = 0;
    do {
        ++total;
        if (std::fabs(oracle::pearson_r(x, y)) >= observed - 1e-12) ++extreme;
    } while (std::next_permutation(y.begin(), y.end()));
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("incomplete beta and t tail match reference values") {
    // Reference values from scipy.special.betainc / scipy.stats.t.sf.
    CHECK(incomplete_beta(2.5, 0.5, 0.3) == Approx(0.018927124071945658).epsilon(1e-12));
    CHECK(incomplete_beta(10, 0.5, 0.9) == Approx(0.15164090963470994).epsilon(1e-12));
    CHECK(incomplete_beta(0.5, 0.5, 0.5) == Approx(0.5).epsilon(1e-12));
    CHECK(student_t_two_sided(2.0, 5) == Approx(0.10193947882985828).epsilon(1e-12));
    CHECK(student_t_two_sided(0.5, 1) == Approx(0.7048327646991336).epsilon(1e-12));
    CHECK(student_t_two_sided(4.2, 100) == Approx(5.80273548395867e-05).epsilon(1e-10));
    CHECK_THROWS_AS(incomplete_beta(0, 1, 0.5), ValidationError);
}

TEST_CASE("pearson examples") {
    const std::vector<double> a{1, 2, 3};
    CHECK(pearson(a, std::vector<double>{1, 2, 3}).r == Approx(1.0).epsilon(1e-15));
    CHECK(pearson(a, std::vector<double>{6, 4, 2}).r == Approx(-1.0).epsilon(1e-15));
    CHECK(pearson(a, std::vector<double>{1, 2, 3}).p_raw == 0.0);

    // Sxy = 4, Sxx = Syy = 5 by hand.
    const auto r = pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4});
    CHECK(r.r == Approx(0.8).epsilon(1e-14));
    CHECK(r.n == 4);
    CHECK(r.p_raw == Approx(0.2).epsilon(1e-12));  // scipy.stats.pearsonr
}

TEST_CASE("pearson errors") {
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), ValidationError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), ValidationError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), UndefinedStatisticError);
}

TEST_CASE("pearson p-value agrees with an exhaustive permutation test") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> y{2, 1, 4, 3, 7, 5};
    const auto res = pearson(x, y);
    CHECK(res.p_raw == Approx(0.06051140336275659).epsilon(1e-10));
    // Permutation and t-based p differ by small-sample discreteness only.
    CHECK(std::fabs(permutation_p(x, y) - res.p_raw) < 0.03);
}

TEST_CASE("pearson properties: symmetry, affine invariance, oracle agreement") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + trial % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = normal(rng);
            y[i] = 0.3 * x[i] + normal(rng);
        }
        const double r = pearson(x, y).r;
        CHECK(std::fabs(r - pearson(y, x).r) <= 1e-12);
        CHECK(std::fabs(r - oracle::pearson_r(x, y)) <= 1e-12);
        std::vector<double> xa(n);
        std::transform(x.begin(), x.end(), xa.begin(), [](double v) { return 3.5 * v - 7.0; });
        CHECK(std::fabs(r - pearson(xa, y).r) <= 1e-12);
    }
}

TEST_CASE("pearson accepts Eigen expressions") {
    Eigen::VectorXd x(4), y(4);
    x << 1, 2, 3, 4;
    y << 1, 3, 2, 4;
    CHECK(pearson(x, 2.0 * y.array() + 1.0).r == Approx(0.8));
}

TEST_CASE("icc2k examples") {
    Eigen::MatrixXd perfect(3, 2);
    perfect << 1, 1, 2, 2, 3, 3;
    CHECK(icc2k(perfect).value == 1.0);

    Eigen::MatrixXd offset(3, 2);
    offset << 1, 2, 1, 2, 1, 2;
    CHECK(icc2k(offset).value == 0.0);

    // Shrout & Fleiss (1979) 6 targets x 4 judges; published ICC(2,4) = .62.
    Eigen::MatrixXd sf(6, 4);
    sf << 9, 2, 5, 8, 6, 1, 3, 2, 8, 4, 6, 8, 7, 1, 2, 6, 10, 5, 6, 9, 6, 2, 4, 7;
    const auto res = icc2k(sf);
    CHECK(std::fabs(res.value - oracle::icc2k(sf)) <= 1e-10);
    CHECK(res.value == Approx(0.6200505475989891).epsilon(1e-12));
    CHECK(res.n_subjects == 6);
    CHECK(res.k_raters == 4);
    CHECK(IccResult::model.find("ICC(2,k)") != std::string_view::npos);
}

TEST_CASE("icc2k errors") {
    Eigen::MatrixXd one_rater(3, 1);
    one_rater << 1, 2, 3;
    CHECK_THROWS_AS(icc2k(one_rater), ValidationError);
    Eigen::MatrixXd missing(2, 2);
    missing << 1, std::nan(""), 2, 3;
    CHECK_THROWS_AS(icc2k(missing), ValidationError);
    Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(4, 3, 5.0);
    CHECK_THROWS_AS(icc2k(constant), UndefinedStatisticError);
}

TEST_CASE("icc2k matches the ANOVA oracle and is shift invariant") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 150; ++trial) {
        const Eigen::Index n = 2 + trial % 30;
        const Eigen::Index k = 2 + trial % 4;
        Eigen::MatrixXd m(n, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double subject = normal(rng);
            for (Eigen::Index j = 0; j < k; ++j) m(i, j) = subject + 0.5 * normal(rng) + 0.2 * j;
        }
        const double v = icc2k(m).value;
        CHECK(std::fabs(v - oracle::icc2k(m)) <= 1e-10);
        const Eigen::MatrixXd shifted = m.array() + 123.0;
        CHECK(std::fabs(v - icc2k(shifted).value) <= 1e-9);
    }
}

TEST_CASE("median_rating") {
    CHECK(median_rating(triple(3, 5, 4)) == 4);
    CHECK(median_rating(triple(7, 7, 7)) == 7);
    CHECK(median_rating(triple(2, 2, 8)) == 2);
}

TEST_CASE("filter_by_disagreement") {
    const std::vector<data::RatingTriple> labels{triple(5000, 5000, 5000), triple(0, 1600, 3200),
                                                 triple(0, 0, 6000), triple(100, 200, 300)};
    CHECK(rating_spread(labels[1]) == 1600.0);
    CHECK(rating_spread(labels[2]) == Approx(3464.1016151377544).epsilon(1e-12));
    const auto split = filter_by_disagreement(labels, 1600);
    REQUIRE(split.kept.size() == 2);
    REQUIRE(split.excluded.size() == 2);
    CHECK(split.kept[0].values[0] == 5000);
    CHECK(split.kept[1].values[0] == 100);
    CHECK(split.excluded[0].values[1] == 1600);
    CHECK(split.excluded[1].values[2] == 6000);
    CHECK_THROWS_AS(filter_by_disagreement(labels, 0.0), ValidationError);

    SUBCASE("limits of sigma_max") {
        CHECK(filter_by_disagreement(labels, 1e300).kept.size() == labels.size());
        const auto tight = filter_by_disagreement(labels, 1e-300);
        REQUIRE(tight.kept.size() == 1);
        CHECK(tight.kept[0].values == std::array<double, 3>{5000, 5000, 5000});
    }

    SUBCASE("agrees with an independent std computation") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0, 10000);
        std::vector<data::RatingTriple> random;
        for (int i = 0; i < 500; ++i) random.push_back(triple(u(rng), u(rng), u(rng)));
        std::size_t expected = 0;
        for (const auto& t : random)
            if (oracle::sample_std({t.values[0], t.values[1], t.values[2]}) >= 1600) ++expected;
        CHECK(filter_by_disagreement(random, 1600).excluded.size() == expected);
    }
}

TEST_CASE("fdr_adjust examples") {
    auto single = fdr_adjust(std::vector<double>{0.05});
    CHECK(single[0] == Approx(0.05));
    auto two = fdr_adjust(std::vector<double>{0.01, 0.04});
    CHECK(two[0] == Approx(0.02).epsilon(1e-15));
    CHECK(two[1] == Approx(0.04).epsilon(1e-15));
    auto three = fdr_adjust(std::vector<double>{0.03, 0.01, 0.04});
    CHECK(three[0] == Approx(0.04).epsilon(1e-15));
    CHECK(three[1] == Approx(0.03).epsilon(1e-15));
    CHECK(three[2] == Approx(0.04).epsilon(1e-15));
    CHECK(fdr_adjust(std::vector<double>{}).empty());
    CHECK_THROWS_AS(fdr_adjust(std::vector<double>{0.5, 1.5}), ValidationError);
    CHECK_THROWS_AS(fdr_adjust(std::vector<double>{std::nan("")}), ValidationError);
}

TEST_CASE("fdr_adjust properties") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + trial % 25;
        std::vector<double> p(m);
        for (auto& v : p) v = trial % 3 == 0 ? std::round(u(rng) * 10) / 10 : u(rng);  // ties
        const auto q = fdr_adjust(p);
        const auto ref = oracle::bh_step_up(p);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> permuted(m);
        for (std::size_t i = 0; i < m; ++i) permuted[i] = p[perm[i]];
        const auto q_perm = fdr_adjust(permuted);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(q[i] >= p[i]);
            CHECK(q[i] <= 1.0);
            CHECK(q[i] == Approx(ref[i]).epsilon(1e-14));
            CHECK(q_perm[i] == q[perm[i]]);
        }
    }
}

TEST_CASE("median of even and odd samples") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 3, 2}) == 2.5);
    CHECK_THROWS_AS(median({}), ValidationError);
}
