// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/quadrature.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/synthetic.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace liqhedge;

TEST(GaussLegendre, ExactOnPolynomialsUpToDegree2nMinus1) {
    for (int n : {2, 5, 20}) {
        const auto rule = gauss_legendre(n);
        ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(n));
        EXPECT_NEAR(std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0), 2.0, 1e-14);
        EXPECT_TRUE(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            const double exact = (std::pow(3.0, d + 1) - std::pow(-1.0, d + 1)) / (d + 1);
            const double got = integrate(rule, -1.0, 3.0, [&](double x) { return std::pow(x, d); });
            EXPECT_NEAR(got, exact, 1e-12 * std::max(1.0, std::abs(exact))) << "n=" << n << " d=" << d;
        }
    }
}

TEST(GaussLegendre, KnownThreePointRule) {
    const auto rule = gauss_legendre(3);
    EXPECT_NEAR(rule.nodes[0], -std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(rule.nodes[1], 0.0, 1e-15);
    EXPECT_NEAR(rule.weights[1], 8.0 / 9.0, 1e-15);
    EXPECT_NEAR(rule.weights[0], 5.0 / 9.0, 1e-15);
}

TEST(ViewModel, Validation) {
    EXPECT_THROW((ViewModel{0.0, 0.0, 5.0, 100.0}).validate(), ValidationError);
    EXPECT_THROW((ViewModel{0.0, 0.1, 2.0, 100.0}).validate(), ValidationError);
    EXPECT_THROW((ViewModel{0.0, 0.1, 5.0, -1.0}).validate(), ValidationError);
    EXPECT_THROW((GridOptions{0, 20, 1e-6}).validate(), ValidationError);
    EXPECT_THROW((GridOptions{10, 1, 1e-6}).validate(), ValidationError);
    EXPECT_THROW((GridOptions{10, 4, 0.5}).validate(), ValidationError);
    EXPECT_THROW((GridOptions{10, 4, 1e-6, -1}).validate(), ValidationError);
    EXPECT_NO_THROW(reference_view().validate());
}

TEST(Quantile, MatchesTables) {
    const ViewModel g{0.01, 0.2, std::numeric_limits<double>::infinity(), 100.0};
    EXPECT_NEAR(quantile(g, 0.975), 0.01 + 0.2 * 1.959963984540054, 1e-12);
    // t with 5 degrees of freedom, two-sided 95%
    const ViewModel t{0.0, 1.0, 5.0, 100.0};
    EXPECT_NEAR(quantile(t, 0.975), 2.570581835636314, 1e-10);
    EXPECT_THROW((void)quantile(t, 1.0), DomainError);
}

TEST(Grid, WeightsSumToOneAndNodesIncrease) {
    const auto grid = build_grid(reference_view());
    // 50 panels plus 6 halvings on each side
    EXPECT_EQ(grid.size(), 1240u);
    EXPECT_NEAR(std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0), 1.0, 1e-14);
    EXPECT_TRUE(std::is_sorted(grid.nodes.begin(), grid.nodes.end()));
    for (double w : grid.weights) EXPECT_GT(w, 0.0);
}

TEST(Grid, TailSplitsOnlyRefineTheOutermostPanels) {
    const auto v = reference_view();
    const auto plain = build_grid(v, {50, 20, 1e-6, 0});
    const auto split = build_grid(v, {50, 20, 1e-6, 6});
    EXPECT_EQ(plain.size(), 1000u);
    // a tail event is resolved better once its panel is split
    const auto lo = [&](const ScenarioGrid& g) { return g.expectation([](double x) { return x < 1700.0 ? 1.0 : 0.0; }); };
    const double z = (std::log(1700.0 / v.spot) - v.mu) / v.sigma;
    const double exact = (boost::math::cdf(boost::math::students_t_distribution<double>(v.nu), z) - 1e-6) / (1.0 - 2e-6);
    EXPECT_LT(std::abs(lo(split) - exact), 0.1 * std::abs(lo(plain) - exact));
    // same interior panels
    for (std::size_t k = 120; k < 880; ++k) EXPECT_DOUBLE_EQ(plain.nodes[k], split.nodes[k + 120]);
    // splits stop once the sub-panel would fall inside the cut tail
    EXPECT_EQ(build_grid(v, {50, 4, 1e-3, 40}).size(), static_cast<std::size_t>(4 * (50 + 2 * 4)));
}

TEST(Grid, GaussianMomentsMatchLognormal) {
    const ViewModel g{0.01, 0.1, std::numeric_limits<double>::infinity(), 2000.0};
    const auto grid = build_grid(g);
    const double mean = grid.expectation([](double x) { return x; });
    EXPECT_NEAR(mean, 2000.0 * std::exp(0.01 + 0.005), 1e-6 * 2000.0);
    const double second = grid.expectation([](double x) { return x * x; });
    EXPECT_NEAR(second, 2000.0 * 2000.0 * std::exp(0.02 + 0.02), 1e-5 * 4e6);
}

TEST(Grid, StudentLogMomentsMatchView) {
    const auto v = reference_view();
    const auto grid = build_grid(v, {200, 20, 1e-9});
    const double m1 = grid.expectation([&](double x) { return std::log(x / v.spot); });
    EXPECT_NEAR(m1, v.mu, 1e-10);
    const double m2 = grid.expectation([&](double x) { return std::pow(std::log(x / v.spot) - v.mu, 2); });
    // the truncated tails carry a small share of the heavy-tailed variance
    EXPECT_NEAR(m2, v.log_variance(), 0.02 * v.log_variance());
}

TEST(Grid, CallPricesAgreeWithBlackScholesUnderGaussianView) {
    // risk-neutral Gaussian view: mu = (r - sigma^2 / 2) T
    const double S = 2056.32, r = 0.0043, T = 0.19, vol = 0.15;
    const ViewModel q{(r - 0.5 * vol * vol) * T, vol * std::sqrt(T), std::numeric_limits<double>::infinity(), S};
    // narrow panels keep the payoff kink from dominating the error
    const auto grid = build_grid(q, {400, 20, 1e-12});
    for (double k : {1700.0, 2050.0, 2400.0}) {
        const double got = std::exp(-r * T) * grid.expectation([&](double x) { return std::max(x - k, 0.0); });
        EXPECT_NEAR(got, black_scholes(true, S, k, r, vol, T), 1e-6 * S);
    }
}

TEST(Sample, DeterministicPerSeed) {
    const auto v = reference_view();
    const auto a = sample(v, 1000, 7), b = sample(v, 1000, 7), c = sample(v, 1000, 8);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    EXPECT_THROW((void)sample(v, 0, 1), ValidationError);
}
