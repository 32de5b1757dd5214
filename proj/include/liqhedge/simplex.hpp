// SPDX-License-Identifier: Apache-2.0
//
// Bounded-variable primal simplex for
//
//   minimize c'x  subject to  A x >= b,  0 <= x <= u   (u may be +inf)
//
// Revised form with a dense basis inverse, refactorized periodically. Sized
// for the hedging LPs (a few hundred rows and columns).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace liqhedge {

struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    Eigen::VectorXd x;
    double objective = 0.0;
    Eigen::VectorXd duals;      // one per row of A, nonnegative at the optimum
    Eigen::VectorXd row_slack;  // A x - b; when infeasible, negative on rows left uncovered
    int iterations = 0;
};

namespace detail {

// Columns: n structurals, m surplus variables (A x - s = b), m artificials.
class RevisedSimplex {
public:
    RevisedSimplex(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::VectorXd upper)
        : A_(std::move(A)), b_(std::move(b)), m_(A_.rows()), n_(A_.cols()) {
        const Eigen::Index total = n_ + 2 * m_;
        lo_ = Eigen::VectorXd::Zero(total);
        up_ = Eigen::VectorXd::Constant(total, kInf);
        up_.head(n_) = upper;
        x_ = Eigen::VectorXd::Zero(total);
        basic_pos_.assign(static_cast<std::size_t>(total), -1);
        basis_.resize(static_cast<std::size_t>(m_));
        art_sign_.resize(static_cast<std::size_t>(m_));
        for (Eigen::Index r = 0; r < m_; ++r) {
            const Eigen::Index art = n_ + m_ + r;
            if (b_[r] <= 0.0) {
                set_basic(r, n_ + r);
                art_sign_[static_cast<std::size_t>(r)] = 1.0;
                up_[art] = 0.0;
            } else {
                set_basic(r, art);
                art_sign_[static_cast<std::size_t>(r)] = 1.0;
            }
        }
        refactor();
    }

    int iterations = 0;

    [[nodiscard]] bool has_artificials() const {
        for (Eigen::Index r = 0; r < m_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= n_ + m_) return true;
        return false;
    }

    /// Returns Optimal, Unbounded or IterationLimit for the given cost vector.
    LpStatus run(const Eigen::VectorXd& cost, int max_iter) {
        cost_ = cost;
        flat_rays_.assign(static_cast<std::size_t>(x_.size()), false);
        int degenerate = 0;
        int since_refactor = 0;
        for (;;) {
            if (since_refactor >= kRefactorEvery) {
                refactor();
                since_refactor = 0;
            }
            Eigen::VectorXd cb(m_);
            for (Eigen::Index r = 0; r < m_; ++r) cb[r] = cost_[basis_[static_cast<std::size_t>(r)]];
            y_ = binv_.transpose() * cb;

            const bool bland = degenerate > kBlandAfter;
            Eigen::Index enter = -1;
            double best = 0.0;
            int dir = 0;
            for (Eigen::Index j = 0; j < x_.size(); ++j) {
                if (basic_pos_[static_cast<std::size_t>(j)] >= 0 || up_[j] - lo_[j] <= 0.0) continue;
                if (flat_rays_[static_cast<std::size_t>(j)]) continue;
                const double d = reduced_cost(j);
                const bool at_upper = x_[j] >= up_[j];
                double gain = 0.0;
                int dj = 0;
                if (!at_upper && d < -kOptTol) {
                    gain = -d;
                    dj = 1;
                } else if (at_upper && d > kOptTol) {
                    gain = d;
                    dj = -1;
                }
                if (dj == 0) continue;
                if (bland) {
                    enter = j;
                    dir = dj;
                    break;
                }
                if (gain > best) {
                    best = gain;
                    enter = j;
                    dir = dj;
                }
            }
            if (enter < 0) {
                // confirm on a fresh factorization before declaring optimality
                if (since_refactor > 0) {
                    refactor();
                    since_refactor = 0;
                    continue;
                }
                return LpStatus::Optimal;
            }
            if (iterations >= max_iter) return LpStatus::IterationLimit;

            const Eigen::VectorXd alpha = binv_ * column(enter);
            // Harris two-pass ratio test
            double tmax = up_[enter] - lo_[enter];
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = dir * alpha[i];
                const Eigen::Index v = basis_[static_cast<std::size_t>(i)];
                if (a > kPivotTol)
                    tmax = std::min(tmax, (x_[v] - lo_[v] + kFeasTol) / a);
                else if (a < -kPivotTol && std::isfinite(up_[v]))
                    tmax = std::min(tmax, (up_[v] - x_[v] + kFeasTol) / -a);
            }
            if (!std::isfinite(tmax)) {
                // a ray whose gain is rounding noise against the dual magnitudes is not a real descent direction
                if (std::abs(reduced_cost(enter)) <= kRayTol * (1.0 + std::abs(cost_[enter]) + dual_weight(enter))) {
                    flat_rays_[static_cast<std::size_t>(enter)] = true;
                    continue;
                }
                return LpStatus::Unbounded;
            }

            Eigen::Index leave = -1;
            double step = up_[enter] - lo_[enter];
            double best_piv = 0.0;
            bool to_upper = false;
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = dir * alpha[i];
                const Eigen::Index v = basis_[static_cast<std::size_t>(i)];
                double t = kInf;
                bool hits_upper = false;
                if (a > kPivotTol) {
                    t = (x_[v] - lo_[v]) / a;
                } else if (a < -kPivotTol && std::isfinite(up_[v])) {
                    t = (up_[v] - x_[v]) / -a;
                    hits_upper = true;
                } else {
                    continue;
                }
                if (t > tmax) continue;
                const bool better = bland ? (leave < 0 || v < basis_[static_cast<std::size_t>(leave)])
                                          : std::abs(a) > best_piv;
                if (better) {
                    best_piv = std::abs(a);
                    leave = i;
                    step = std::max(t, 0.0);
                    to_upper = hits_upper;
                }
            }
            ++iterations;
            ++since_refactor;
            if (leave < 0) {
                // bound flip of the entering variable
                step = up_[enter] - lo_[enter];
                apply_step(enter, dir, step, alpha);
                x_[enter] = dir > 0 ? up_[enter] : lo_[enter];
                degenerate = 0;
                continue;
            }
            degenerate = step <= 1e-12 ? degenerate + 1 : 0;
            apply_step(enter, dir, step, alpha);
            const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
            x_[out] = to_upper ? up_[out] : lo_[out];
            basic_pos_[static_cast<std::size_t>(out)] = -1;
            set_basic(leave, enter);
            update_inverse(leave, alpha);
        }
    }

    /// Fix artificials at zero once phase 1 has removed them from the solution.
    void retire_artificials() {
        for (Eigen::Index r = 0; r < m_; ++r) up_[n_ + m_ + r] = 0.0;
    }

    [[nodiscard]] const Eigen::VectorXd& values() const { return x_; }
    [[nodiscard]] const Eigen::VectorXd& duals() const { return y_; }
    [[nodiscard]] Eigen::Index rows() const { return m_; }
    [[nodiscard]] Eigen::Index structurals() const { return n_; }

    void refactor() {
        Eigen::MatrixXd B(m_, m_);
        for (Eigen::Index r = 0; r < m_; ++r) B.col(r) = column(basis_[static_cast<std::size_t>(r)]);
        binv_ = B.partialPivLu().inverse();
        Eigen::VectorXd rhs = b_;
        for (Eigen::Index j = 0; j < x_.size(); ++j)
            if (basic_pos_[static_cast<std::size_t>(j)] < 0 && x_[j] != 0.0) rhs -= x_[j] * column(j);
        const Eigen::VectorXd xb = binv_ * rhs;
        for (Eigen::Index r = 0; r < m_; ++r) x_[basis_[static_cast<std::size_t>(r)]] = xb[r];
    }

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static constexpr double kOptTol = 1e-9;
    static constexpr double kPivotTol = 1e-9;
    static constexpr double kFeasTol = 1e-9;
    static constexpr int kRefactorEvery = 50;
    static constexpr int kBlandAfter = 200;
    static constexpr double kRayTol = 1e-7;

    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    Eigen::Index m_;
    Eigen::Index n_;
    Eigen::VectorXd lo_, up_, x_, cost_, y_;
    Eigen::MatrixXd binv_;
    std::vector<Eigen::Index> basis_;
    std::vector<Eigen::Index> basic_pos_;
    std::vector<bool> flat_rays_;
    std::vector<double> art_sign_;

    [[nodiscard]] Eigen::VectorXd column(Eigen::Index j) const {
        if (j < n_) return A_.col(j);
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
        if (j < n_ + m_)
            e[j - n_] = -1.0;
        else
            e[j - n_ - m_] = art_sign_[static_cast<std::size_t>(j - n_ - m_)];
        return e;
    }

    [[nodiscard]] double dual_weight(Eigen::Index j) const {
        if (j < n_) return y_.cwiseAbs().dot(A_.col(j).cwiseAbs());
        if (j < n_ + m_) return std::abs(y_[j - n_]);
        return std::abs(y_[j - n_ - m_]);
    }

    [[nodiscard]] double reduced_cost(Eigen::Index j) const {
        if (j < n_) return cost_[j] - y_.dot(A_.col(j));
        if (j < n_ + m_) return cost_[j] + y_[j - n_];
        return cost_[j] - art_sign_[static_cast<std::size_t>(j - n_ - m_)] * y_[j - n_ - m_];
    }

    void set_basic(Eigen::Index pos, Eigen::Index var) {
        basis_[static_cast<std::size_t>(pos)] = var;
        basic_pos_[static_cast<std::size_t>(var)] = pos;
    }

    void apply_step(Eigen::Index enter, int dir, double step, const Eigen::VectorXd& alpha) {
        if (step == 0.0) return;
        x_[enter] += dir * step;
        for (Eigen::Index i = 0; i < m_; ++i) x_[basis_[static_cast<std::size_t>(i)]] -= dir * step * alpha[i];
    }

    void update_inverse(Eigen::Index r, const Eigen::VectorXd& alpha) {
        binv_.row(r) /= alpha[r];
        for (Eigen::Index i = 0; i < m_; ++i)
            if (i != r && alpha[i] != 0.0) binv_.row(i) -= alpha[i] * binv_.row(r);
    }
};

}  // namespace detail

inline LpResult solve_lp(const LinearProgram& lp, int max_iterations = 50000) {
    const Eigen::Index m = lp.A.rows();
    const Eigen::Index n = lp.A.cols();
    // equilibrate rows, then columns
    Eigen::VectorXd rs = Eigen::VectorXd::Ones(m), cs = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd A = lp.A;
    for (Eigen::Index r = 0; r < m; ++r) {
        const double s = A.row(r).cwiseAbs().maxCoeff();
        if (s > 0.0) rs[r] = 1.0 / s;
        A.row(r) *= rs[r];
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double s = m > 0 ? A.col(j).cwiseAbs().maxCoeff() : 0.0;
        if (s > 0.0) cs[j] = 1.0 / s;
        A.col(j) *= cs[j];
    }
    const Eigen::VectorXd b = rs.cwiseProduct(lp.b);
    const Eigen::VectorXd u = lp.upper.cwiseQuotient(cs);
    const Eigen::VectorXd c = lp.c.cwiseProduct(cs);

    detail::RevisedSimplex sx(A, b, u);
    const Eigen::Index total = n + 2 * m;
    LpResult res;
    if (sx.has_artificials()) {
        Eigen::VectorXd c1 = Eigen::VectorXd::Zero(total);
        c1.tail(m).setOnes();
        const LpStatus s1 = sx.run(c1, max_iterations);
        res.iterations = sx.iterations;
        if (s1 == LpStatus::IterationLimit) {
            res.status = s1;
            return res;
        }
        const double tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());
        if (sx.values().tail(m).maxCoeff() > tol) {
            res.status = LpStatus::Infeasible;
            res.row_slack = Eigen::VectorXd::Zero(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                const double a = sx.values()[n + m + r];
                if (a > tol) res.row_slack[r] = -a / rs[r];
            }
            return res;
        }
        sx.retire_artificials();
    }
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(total);
    c2.head(n) = c;
    const LpStatus s2 = sx.run(c2, max_iterations);
    res.iterations = sx.iterations;
    if (s2 != LpStatus::Optimal) {
        res.status = s2;
        return res;
    }
    res.x = sx.values().head(n).cwiseProduct(cs);
    for (Eigen::Index i = 0; i < n; ++i) {
        res.x[i] = std::max(res.x[i], 0.0);
        if (std::isfinite(lp.upper[i])) res.x[i] = std::min(res.x[i], lp.upper[i]);
    }
    res.objective = lp.c.dot(res.x);
    res.duals = sx.duals().cwiseProduct(rs);
    res.row_slack = lp.A * res.x - lp.b;
    res.status = LpStatus::Optimal;
    return res;
}

}  // namespace liqhedge
