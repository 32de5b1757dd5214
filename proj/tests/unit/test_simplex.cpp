// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace liqhedge;

namespace {

const double inf = std::numeric_limits<double>::infinity();

// Optimality certificate for min c'x, Ax >= b, 0 <= x <= u.
void expect_kkt(const LinearProgram& lp, const LpResult& r, double tol) {
    ASSERT_EQ(r.status, LpStatus::Optimal);
    const Eigen::VectorXd slack = lp.A * r.x - lp.b;
    EXPECT_GE(slack.minCoeff(), -tol);
    EXPECT_GE(r.duals.minCoeff(), -tol);
    for (Eigen::Index i = 0; i < slack.size(); ++i) EXPECT_LE(std::abs(r.duals[i] * slack[i]), tol * (1 + std::abs(slack[i])));
    const Eigen::VectorXd red = lp.c - lp.A.transpose() * r.duals;
    for (Eigen::Index j = 0; j < r.x.size(); ++j) {
        EXPECT_GE(r.x[j], -tol);
        EXPECT_LE(r.x[j], lp.upper[j] + tol);
        if (r.x[j] > tol) EXPECT_LE(red[j], tol);
        if (r.x[j] < lp.upper[j] - tol) EXPECT_GE(red[j], -tol);
    }
    // strong duality: c'x = b'y - sum_j u_j max(-red_j, 0)
    double dual = lp.b.dot(r.duals);
    for (Eigen::Index j = 0; j < r.x.size(); ++j)
        if (red[j] < 0) dual += lp.upper[j] * red[j];
    EXPECT_NEAR(r.objective, dual, tol * (1 + std::abs(dual)));
}

}  // namespace

TEST(Simplex, SmallKnownProblem) {
    // min x + 2y  s.t. x + y >= 2, x - y >= -1, 0 <= x <= 1.5
    LinearProgram lp;
    lp.A.resize(2, 2);
    lp.A << 1, 1, 1, -1;
    lp.b = Eigen::Vector2d(2, -1);
    lp.c = Eigen::Vector2d(1, 2);
    lp.upper = Eigen::Vector2d(1.5, inf);
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.x[0], 1.5, 1e-12);
    EXPECT_NEAR(r.x[1], 0.5, 1e-12);
    EXPECT_NEAR(r.objective, 2.5, 1e-12);
    expect_kkt(lp, r, 1e-9);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
    LinearProgram lp;
    lp.A.resize(1, 1);
    lp.A << 1;
    lp.b = Eigen::VectorXd::Constant(1, 5.0);
    lp.c = Eigen::VectorXd::Constant(1, 1.0);
    lp.upper = Eigen::VectorXd::Constant(1, 2.0);
    const auto r = solve_lp(lp);
    EXPECT_EQ(r.status, LpStatus::Infeasible);
    EXPECT_LT(r.row_slack[0], 0.0);

    LinearProgram ub;
    ub.A.resize(1, 2);
    ub.A << 1, -1;
    ub.b = Eigen::VectorXd::Constant(1, 0.0);
    ub.c = Eigen::Vector2d(1, -2);
    ub.upper = Eigen::Vector2d(inf, inf);
    EXPECT_EQ(solve_lp(ub).status, LpStatus::Unbounded);
}

TEST(Simplex, RandomFeasibleProblemsSatisfyKkt) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 3 + trial % 7, n = 2 + trial % 5;
        LinearProgram lp;
        lp.A.resize(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) lp.A(i, j) = u(rng) * (j % 2 ? 100.0 : 1.0);
        lp.upper.resize(n);
        Eigen::VectorXd x0(n);
        for (int j = 0; j < n; ++j) {
            lp.upper[j] = trial % 3 == 0 ? inf : 5.0 + 5.0 * std::abs(u(rng));
            x0[j] = 2.0 * std::abs(u(rng));
        }
        // b below A x0 keeps x0 feasible
        lp.b = lp.A * x0 - Eigen::VectorXd::Constant(m, 0.5);
        // nonnegative costs keep the problem bounded
        lp.c.resize(n);
        for (int j = 0; j < n; ++j) lp.c[j] = std::abs(u(rng)) + 0.1;
        const auto r = solve_lp(lp);
        expect_kkt(lp, r, 1e-7);
        EXPECT_LE(r.objective, lp.c.dot(x0) + 1e-9);
    }
}

TEST(Simplex, DegenerateRowsDoNotCycle) {
    // many identical constraints through the same vertex
    LinearProgram lp;
    lp.A.resize(12, 2);
    for (int i = 0; i < 12; ++i) lp.A.row(i) << 1.0, 1.0 + (i % 3) * 1e-12;
    lp.b = Eigen::VectorXd::Ones(12);
    lp.c = Eigen::Vector2d(1, 1);
    lp.upper = Eigen::Vector2d(inf, inf);
    const auto r = solve_lp(lp);
    ASSERT_EQ(r.status, LpStatus::Optimal);
    EXPECT_NEAR(r.objective, 1.0, 1e-9);
}
