// SPDX-License-Identifier: Apache-2.0
//
// Static portfolio problem under exponential loss:
//
//   minimize   E exp(kappa * (c - sum_j P_j(x_j)))     kappa = lambda / w_scale
//   over       x in D = prod_j [-bid_depth_j, ask_depth_j]
//   subject to sum_j S_j(x_j) <= wealth
//
// written in split form x = x_long - x_short with both parts nonnegative,
// so that payoffs and entry costs are linear in the decision vector
// z = (x_long, x_short) of length 2J. The expectation is a weighted sum
// over a scenario grid.
//
// The solver minimizes log F (the entropic risk), which has the same
// minimizers as F and is evaluated with a shifted exponent so that large
// exposures cannot overflow.
#pragma once

#include "liqhedge/claims.hpp"
#include "liqhedge/error.hpp"
#include "liqhedge/instruments.hpp"
#include "liqhedge/scenarios.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace liqhedge {

struct Preferences {
    double wealth = 0.0;         // baseline initial cash
    double risk_aversion = 0.0;  // lambda
    double scale_wealth = 0.0;   // w in exp(lambda * c / w); frozen at the baseline wealth

    static Preferences baseline(double wealth, double risk_aversion) { return {wealth, risk_aversion, wealth}; }

    void validate() const {
        if (!(wealth > 0.0) || !std::isfinite(wealth)) throw ValidationError("wealth must be positive");
        if (!(risk_aversion > 0.0) || !std::isfinite(risk_aversion)) throw ValidationError("risk_aversion must be positive");
        if (!(scale_wealth > 0.0) || !std::isfinite(scale_wealth)) throw ValidationError("scale_wealth must be positive");
    }

    [[nodiscard]] double kappa() const { return risk_aversion / scale_wealth; }
};

struct SplitPortfolio {
    std::vector<double> long_units;
    std::vector<double> short_units;

    static SplitPortfolio zeros(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }

    /// Split form of a net position vector.
    static SplitPortfolio from_net(const std::vector<double>& net) {
        auto p = zeros(net.size());
        for (std::size_t j = 0; j < net.size(); ++j) {
            p.long_units[j] = std::max(net[j], 0.0);
            p.short_units[j] = std::max(-net[j], 0.0);
        }
        return p;
    }

    [[nodiscard]] std::size_t size() const { return long_units.size(); }
    [[nodiscard]] double net(std::size_t j) const { return long_units[j] - short_units[j]; }
    [[nodiscard]] std::vector<double> net() const {
        std::vector<double> out(size());
        for (std::size_t j = 0; j < size(); ++j) out[j] = net(j);
        return out;
    }

    /// Decision vector (long..., short...).
    [[nodiscard]] Eigen::VectorXd stacked() const {
        const auto n = static_cast<Eigen::Index>(size());
        Eigen::VectorXd z(2 * n);
        for (Eigen::Index j = 0; j < n; ++j) {
            z[j] = long_units[static_cast<std::size_t>(j)];
            z[n + j] = short_units[static_cast<std::size_t>(j)];
        }
        return z;
    }

    static SplitPortfolio unstack(const Eigen::VectorXd& z) {
        const auto n = z.size() / 2;
        auto p = zeros(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            p.long_units[static_cast<std::size_t>(j)] = z[j];
            p.short_units[static_cast<std::size_t>(j)] = z[n + j];
        }
        return p;
    }
};

/// Net-position difference a - b, in split form.
inline SplitPortfolio difference(const SplitPortfolio& a, const SplitPortfolio& b) {
    std::vector<double> d(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) d[j] = a.net(j) - b.net(j);
    return SplitPortfolio::from_net(d);
}

/// Payoff at maturity of a split portfolio.
inline double portfolio_payoff(const QuoteBook& book, const SplitPortfolio& p, double x_T) {
    double s = 0.0;
    for (std::size_t j = 0; j < book.size(); ++j) {
        const auto& in = book.instruments()[j];
        if (p.long_units[j] != 0.0) s += payoff_unit_long(in, x_T, book.maturity()) * p.long_units[j];
        if (p.short_units[j] != 0.0) s += payoff_unit_short(in, x_T, book.maturity()) * p.short_units[j];
    }
    return s;
}

/// Entry cost of a split portfolio: ask on the long part, bid on the short part.
inline double portfolio_cost(const QuoteBook& book, const SplitPortfolio& p) {
    double s = 0.0;
    for (std::size_t j = 0; j < book.size(); ++j)
        s += book.quotes()[j].ask_price * p.long_units[j] - book.quotes()[j].bid_price * p.short_units[j];
    return s;
}

class Problem {
public:
    Problem(const QuoteBook& book, const ScenarioGrid& grid, const Preferences& prefs, const Liability& liability)
        : wealth_(prefs.wealth), kappa_(prefs.kappa()) {
        prefs.validate();
        if (grid.empty()) throw ValidationError("scenario grid is empty");
        if (grid.nodes.size() != grid.weights.size()) throw ValidationError("grid nodes/weights size mismatch");
        const auto n = static_cast<Eigen::Index>(book.size());
        const auto K = static_cast<Eigen::Index>(grid.size());
        payoff_.resize(K, 2 * n);
        claim_.resize(K);
        weights_.resize(K);
        cost_.resize(2 * n);
        upper_.resize(2 * n);
        for (Eigen::Index k = 0; k < K; ++k) {
            const double x = grid.nodes[static_cast<std::size_t>(k)];
            weights_[k] = grid.weights[static_cast<std::size_t>(k)];
            claim_[k] = liability(x);
            if (!std::isfinite(claim_[k])) throw ValidationError("liability is not finite on the scenario grid");
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto& in = book.instruments()[static_cast<std::size_t>(j)];
                payoff_(k, j) = payoff_unit_long(in, x, book.maturity());
                payoff_(k, n + j) = payoff_unit_short(in, x, book.maturity());
            }
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& q = book.quotes()[static_cast<std::size_t>(j)];
            cost_[j] = q.ask_price;
            cost_[n + j] = -q.bid_price;
            upper_[j] = q.ask_depth;
            upper_[n + j] = q.bid_depth;
            ids_.push_back(q.instrument_id);
        }
    }

    [[nodiscard]] std::size_t instrument_count() const { return ids_.size(); }
    [[nodiscard]] std::size_t variable_count() const { return static_cast<std::size_t>(cost_.size()); }
    [[nodiscard]] std::size_t scenario_count() const { return static_cast<std::size_t>(claim_.size()); }
    /// Lower bounds + finite upper bounds + the budget row.
    [[nodiscard]] std::size_t constraint_count() const {
        std::size_t finite_upper = 0;
        for (Eigen::Index i = 0; i < upper_.size(); ++i) finite_upper += std::isfinite(upper_[i]) ? 1 : 0;
        return variable_count() + finite_upper + 1;
    }

    [[nodiscard]] double wealth() const { return wealth_; }
    [[nodiscard]] double kappa() const { return kappa_; }
    [[nodiscard]] const std::vector<std::string>& instrument_ids() const { return ids_; }
    [[nodiscard]] const Eigen::MatrixXd& payoff_matrix() const { return payoff_; }
    [[nodiscard]] const Eigen::VectorXd& claim_values() const { return claim_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
    [[nodiscard]] const Eigen::VectorXd& budget_row() const { return cost_; }
    [[nodiscard]] const Eigen::VectorXd& upper_bounds() const { return upper_; }

    [[nodiscard]] Problem with_wealth(double w) const {
        Problem p = *this;
        p.wealth_ = w;
        return p;
    }

    /// Exponents kappa * (c_k - payoff_k(z)).
    [[nodiscard]] Eigen::VectorXd exponents(const Eigen::VectorXd& z) const {
        check_size(z);
        return kappa_ * (claim_ - payoff_ * z);
    }

    /// F(z) = sum_k w_k exp(kappa (c_k - payoff_k(z))).
    [[nodiscard]] double objective(const Eigen::VectorXd& z) const { return std::exp(log_objective(z)); }

    /// log F(z), computed with a shifted exponent.
    [[nodiscard]] double log_objective(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd e = exponents(z);
        const double m = e.maxCoeff();
        return m + std::log((weights_.array() * (e.array() - m).exp()).sum());
    }

    /// Gradient of F.
    [[nodiscard]] Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd e = exponents(z);
        const Eigen::VectorXd we = (weights_.array() * e.array().exp()).matrix();
        return -kappa_ * (payoff_.transpose() * we);
    }

    [[nodiscard]] double budget_use(const Eigen::VectorXd& z) const { return cost_.dot(z); }

    [[nodiscard]] bool feasible(const Eigen::VectorXd& z, double tol = 1e-9) const {
        check_size(z);
        for (Eigen::Index i = 0; i < z.size(); ++i)
            if (z[i] < -tol || z[i] > upper_[i] + tol * (1.0 + std::abs(upper_[i]))) return false;
        return budget_use(z) <= wealth_ + tol * (1.0 + std::abs(wealth_));
    }

    /// Net terminal position per scenario: portfolio payoff minus liability.
    [[nodiscard]] Eigen::VectorXd scenario_payoffs(const Eigen::VectorXd& z) const { return payoff_ * z - claim_; }

private:
    Eigen::MatrixXd payoff_;  // scenarios x 2J
    Eigen::VectorXd claim_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd cost_;
    Eigen::VectorXd upper_;
    double wealth_;
    double kappa_;
    std::vector<std::string> ids_;

    void check_size(const Eigen::VectorXd& z) const {
        if (z.size() != cost_.size()) throw ValidationError("decision vector has wrong length");
    }
};

inline Problem assemble(const QuoteBook& book, const ScenarioGrid& grid, const Preferences& prefs,
                        const Liability& liability = {}) {
    return Problem(book, grid, prefs, liability);
}

struct SolverOptions {
    double tol = 1e-8;
    int max_iterations = 200;
};

enum class SolveStatus { Optimal, IterationLimit, NumericalFailure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::IterationLimit: return "iteration_limit";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

struct SolveResult {
    SplitPortfolio portfolio;
    double objective = 0.0;      // E v(.)
    double entropic_risk = 0.0;  // log(objective)
    double budget_slack = 0.0;
    double kkt_residual = 0.0;
    double duality_gap = 0.0;  // complementarity s'y, an upper bound on the suboptimality of log F
    std::vector<double> scenario_payoffs;
    SolveStatus status = SolveStatus::Optimal;
    int iterations = 0;

    [[nodiscard]] bool ok() const { return status == SolveStatus::Optimal; }
};

inline double entropic_risk(const SolveResult& r) {
    if (!(r.objective > 0.0)) throw DomainError("objective must be positive");
    return std::log(r.objective);
}

namespace detail {

// One solver variable. Spread-free instruments (equal bid/ask and mirrored
// payoffs) are carried as a single net variable; the others keep separate
// long and short parts.
struct ReducedVar {
    Eigen::Index long_col = -1;
    Eigen::Index short_col = -1;
    double lo = 0.0;
    double hi = 0.0;
};

// Primal-dual barrier method on log F.
//
// A variable with unlimited upper depth and a payoff that is positive in every
// scenario (long cash) makes the budget bind at the optimum, so it is solved
// for from the budget instead of being carried: the budget row becomes the
// lower bound of that variable, whose slack stays large. Without such a
// variable the budget row is kept as a general inequality.
class InteriorPoint {
public:
    InteriorPoint(const Problem& p, const SolverOptions& opts) : p_(p), opts_(opts) {
        const auto& P = p.payoff_matrix();
        const auto& c = p.budget_row();
        const auto& u = p.upper_bounds();
        const Eigen::Index J = static_cast<Eigen::Index>(p.instrument_count());
        std::vector<ReducedVar> all;
        for (Eigen::Index j = 0; j < J; ++j) {
            const bool mirrored = c[j] == -c[J + j] && (P.col(j) + P.col(J + j)).cwiseAbs().maxCoeff() == 0.0;
            if (mirrored) {
                if (u[j] > 0.0 || u[J + j] > 0.0) all.push_back({j, J + j, -u[J + j], u[j]});
            } else {
                if (u[j] > 0.0) all.push_back({j, -1, 0.0, u[j]});
                if (u[J + j] > 0.0) all.push_back({-1, J + j, 0.0, u[J + j]});
            }
        }
        auto column_of = [](const ReducedVar& v) { return v.long_col >= 0 ? v.long_col : v.short_col; };
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto col = column_of(all[i]);
            if (!std::isfinite(all[i].hi) && c[col] > 0.0 && P.rows() > 0 && P.col(col).minCoeff() > 0.0) {
                pivot_ = static_cast<Eigen::Index>(i);
                break;
            }
        }
        for (std::size_t i = 0; i < all.size(); ++i)
            if (static_cast<Eigen::Index>(i) != pivot_) vars_.push_back(all[i]);
        if (pivot_ >= 0) pivot_var_ = all[static_cast<std::size_t>(pivot_)];

        const auto n = static_cast<Eigen::Index>(vars_.size());
        B_.resize(P.rows(), n);
        g_.resize(n);
        d_.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& v = vars_[static_cast<std::size_t>(i)];
            const auto col = column_of(v);
            // work in units of each variable's range so the Newton systems stay well scaled
            double d = v.hi - v.lo;
            if (!std::isfinite(d)) d = c[col] != 0.0 ? std::abs(p.wealth() / c[col]) : 1.0;
            d = std::max(d, 1.0);
            d_[i] = d;
            B_.col(i) = P.col(col) * d;
            g_[i] = c[col] * d;
            v.lo /= d;
            v.hi /= d;
        }
        shift_ = p.claim_values();
        rhs_ = p.wealth();
        if (pivot_ >= 0) {
            const auto col = column_of(pivot_var_);
            pivot_cost_ = c[col];
            const Eigen::VectorXd bp = P.col(col);
            shift_ -= bp * (p.wealth() / pivot_cost_);
            B_ -= bp * (g_.transpose() / pivot_cost_);
            has_row_ = std::isfinite(pivot_var_.lo);
            if (has_row_) rhs_ = p.wealth() - pivot_cost_ * pivot_var_.lo;
        }
        drop_redundant_free_columns();
    }

    SolveResult run() {
        const auto n = static_cast<Eigen::Index>(vars_.size());
        Eigen::VectorXd y = initial_point();
        State st = evaluate(y);
        if (!std::isfinite(st.h)) return finish(y, SolveStatus::NumericalFailure, 0, inf(), inf());

        const double m_con = static_cast<double>(count_constraints());
        if (m_con == 0.0) return unconstrained(y, st);
        // barrier level, lowered each time the barrier problem is solved to within kBarrierFit * tau
        double tau = 0.1 * (1.0 + std::abs(st.h)) / std::sqrt(m_con);
        const double tau_min = 0.1 * opts_.tol / m_con;

        Slacks s = slacks(y);
        double lam_b = has_row_ ? tau / s.b : 0.0;
        Eigen::VectorXd lam_lo = Eigen::VectorXd::Zero(n), lam_hi = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (has_lo(i)) lam_lo[i] = tau / s.lo[i];
            if (has_hi(i)) lam_hi[i] = tau / s.hi[i];
        }

        int it = 0;
        double kkt = inf(), gap = inf();
        for (; it < opts_.max_iterations; ++it) {
            const double scale_h = 1.0 + std::abs(st.h);
            const Eigen::VectorXd rd = st.grad + g_ * lam_b - lam_lo + lam_hi;
            const double stat = rd.cwiseAbs().maxCoeff() / (1.0 + st.grad.cwiseAbs().maxCoeff());
            gap = s.b * lam_b + (s.lo.array() * lam_lo.array()).sum() + (s.hi.array() * lam_hi.array()).sum();
            kkt = std::max(stat, gap / scale_h);
            if (kkt <= opts_.tol) return finish(y, SolveStatus::Optimal, it, kkt, gap);

            // centrality error at the current barrier level
            double cent = has_row_ ? std::abs(s.b * lam_b - tau) : 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (has_lo(i)) cent = std::max(cent, std::abs(s.lo[i] * lam_lo[i] - tau));
                if (has_hi(i)) cent = std::max(cent, std::abs(s.hi[i] * lam_hi[i] - tau));
            }
            while (tau > tau_min && std::max(stat, cent / scale_h) <= kBarrierFit * tau / scale_h) {
                tau = std::max(tau_min, std::min(0.2 * tau, std::pow(tau, 1.5)));
                cent = inf();
            }

            // M = Hess h + C' diag(lambda / s) C
            Eigen::MatrixXd M = st.hess;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (has_lo(i)) M(i, i) += lam_lo[i] / s.lo[i];
                if (has_hi(i)) M(i, i) += lam_hi[i] / s.hi[i];
            }
            if (has_row_) M.selfadjointView<Eigen::Lower>().rankUpdate(g_, lam_b / s.b);
            // symmetric diagonal scaling before the factorization
            Eigen::VectorXd dsc(n);
            for (Eigen::Index i = 0; i < n; ++i) dsc[i] = M(i, i) > 0.0 ? 1.0 / std::sqrt(M(i, i)) : 1.0;
            M = dsc.asDiagonal() * M.selfadjointView<Eigen::Lower>().toDenseMatrix() * dsc.asDiagonal();
            M.diagonal().array() += 1e-14;
            Eigen::LDLT<Eigen::MatrixXd, Eigen::Lower> ldlt(M);
            if (ldlt.info() != Eigen::Success) return finish(y, SolveStatus::NumericalFailure, it, kkt, gap);

            // M dy = -grad h - C' (tau / s)
            const Eigen::VectorXd grad_phi = barrier_gradient(st.grad, s, tau);
            const Eigen::VectorXd dy = dsc.asDiagonal() * ldlt.solve(-(dsc.asDiagonal() * grad_phi)).eval();
            const double ds_b = -g_.dot(dy);
            const double dl_b = has_row_ ? (tau - lam_b * s.b - lam_b * ds_b) / s.b : 0.0;
            Eigen::VectorXd dl_lo = Eigen::VectorXd::Zero(n), dl_hi = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (has_lo(i)) dl_lo[i] = (tau - lam_lo[i] * s.lo[i] - lam_lo[i] * dy[i]) / s.lo[i];
                if (has_hi(i)) dl_hi[i] = (tau - lam_hi[i] * s.hi[i] + lam_hi[i] * dy[i]) / s.hi[i];
            }

            // fraction to the boundary
            const double frac = std::max(0.99, 1.0 - tau);
            double ap = 1.0, ad = 1.0;
            if (has_row_) {
                if (ds_b < 0) ap = std::min(ap, -frac * s.b / ds_b);
                if (dl_b < 0) ad = std::min(ad, -frac * lam_b / dl_b);
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                if (has_lo(i)) {
                    if (dy[i] < 0) ap = std::min(ap, -frac * s.lo[i] / dy[i]);
                    if (dl_lo[i] < 0) ad = std::min(ad, -frac * lam_lo[i] / dl_lo[i]);
                }
                if (has_hi(i)) {
                    if (dy[i] > 0) ap = std::min(ap, frac * s.hi[i] / dy[i]);
                    if (dl_hi[i] < 0) ad = std::min(ad, -frac * lam_hi[i] / dl_hi[i]);
                }
            }

            // backtracking on the primal barrier function at level tau
            const double phi0 = barrier(st.h, s, tau);
            const double slope = grad_phi.dot(dy);
            double alpha = ap;
            State trial;
            Slacks trial_s;
            bool accepted = false;
            for (int bt = 0; bt < 60; ++bt) {
                const Eigen::VectorXd yt = y + alpha * dy;
                trial_s = slacks(yt);
                if (trial_s.positive()) {
                    trial = evaluate(yt);
                    if (std::isfinite(trial.h)) {
                        const double phi = barrier(trial.h, trial_s, tau);
                        const double noise = 1e-13 * (1.0 + std::abs(phi0));
                        if (phi <= phi0 + 1e-4 * alpha * slope + noise) {
                            accepted = true;
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                const SolveStatus status =
                    kkt <= std::sqrt(opts_.tol) ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
                return finish(y, status, it, kkt, gap);
            }
            y += alpha * dy;
            st = std::move(trial);
            s = std::move(trial_s);
            lam_b += ad * dl_b;
            lam_lo += ad * dl_lo;
            lam_hi += ad * dl_hi;
            // keep each multiplier within a band around tau / s
            auto clamp_dual = [&](double& l, double sl) {
                l = std::clamp(l, tau / (kDualBand * sl), kDualBand * tau / sl);
            };
            if (has_row_) clamp_dual(lam_b, s.b);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (has_lo(i)) clamp_dual(lam_lo[i], s.lo[i]);
                if (has_hi(i)) clamp_dual(lam_hi[i], s.hi[i]);
            }
        }
        return finish(y, SolveStatus::IterationLimit, it, kkt, gap);
    }

private:
    struct State {
        double h = 0.0;
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;  // lower triangle
    };
    struct Slacks {
        double b = 1.0;
        Eigen::VectorXd lo, hi;
        [[nodiscard]] bool positive() const {
            return b > 0.0 && (lo.array() > 0.0).all() && (hi.array() > 0.0).all();
        }
    };

    static constexpr double kBarrierFit = 10.0;
    static constexpr double kDualBand = 1e10;

    const Problem& p_;
    SolverOptions opts_;
    std::vector<ReducedVar> vars_;
    Eigen::Index pivot_ = -1;  // index into the full variable list, -1 when the budget row is kept
    ReducedVar pivot_var_;
    double pivot_cost_ = 1.0;
    bool has_row_ = true;
    double rhs_ = 0.0;          // general row: g' y <= rhs
    Eigen::VectorXd shift_;     // claim values less the pivot payoff of the whole wealth
    Eigen::MatrixXd B_;
    Eigen::VectorXd g_;
    Eigen::VectorXd d_;  // variable scales
    // free columns held at zero, see drop_redundant_free_columns
    std::vector<ReducedVar> held_;
    Eigen::VectorXd held_d_, held_g_;
    // a flat direction that moves the budget; the row is then restored after the solve
    bool row_deferred_ = false;
    double deferred_rhs_ = 0.0;
    Eigen::VectorXd flat_kept_, flat_held_;

    static double inf() { return std::numeric_limits<double>::infinity(); }
    [[nodiscard]] bool has_lo(Eigen::Index i) const { return std::isfinite(vars_[static_cast<std::size_t>(i)].lo); }
    [[nodiscard]] bool has_hi(Eigen::Index i) const { return std::isfinite(vars_[static_cast<std::size_t>(i)].hi); }

    [[nodiscard]] std::size_t count_constraints() const {
        std::size_t m = has_row_ ? 1 : 0;
        for (const auto& v : vars_) m += (std::isfinite(v.lo) ? 1 : 0) + (std::isfinite(v.hi) ? 1 : 0);
        return m;
    }

    [[nodiscard]] Slacks slacks(const Eigen::VectorXd& y) const {
        const auto n = y.size();
        Slacks s;
        s.b = has_row_ ? rhs_ - g_.dot(y) : 1.0;
        s.lo = Eigen::VectorXd::Ones(n);
        s.hi = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& v = vars_[static_cast<std::size_t>(i)];
            if (std::isfinite(v.lo)) s.lo[i] = y[i] - v.lo;
            if (std::isfinite(v.hi)) s.hi[i] = v.hi - y[i];
        }
        return s;
    }

    [[nodiscard]] double barrier(double h, const Slacks& s, double tau) const {
        double b = has_row_ ? std::log(s.b) : 0.0;
        for (Eigen::Index i = 0; i < s.lo.size(); ++i) {
            if (has_lo(i)) b += std::log(s.lo[i]);
            if (has_hi(i)) b += std::log(s.hi[i]);
        }
        return h - tau * b;
    }

    [[nodiscard]] Eigen::VectorXd barrier_gradient(const Eigen::VectorXd& grad, const Slacks& s, double tau) const {
        Eigen::VectorXd gphi = grad;
        if (has_row_) gphi += g_ * (tau / s.b);
        for (Eigen::Index i = 0; i < s.lo.size(); ++i) {
            if (has_lo(i)) gphi[i] -= tau / s.lo[i];
            if (has_hi(i)) gphi[i] += tau / s.hi[i];
        }
        return gphi;
    }

    [[nodiscard]] State evaluate(const Eigen::VectorXd& y) const {
        const double kappa = p_.kappa();
        State st;
        const Eigen::VectorXd e = kappa * (shift_ - B_ * y);
        const double m = e.maxCoeff();
        Eigen::ArrayXd pw = p_.weights().array() * (e.array() - m).exp();
        const double total = pw.sum();
        st.h = m + std::log(total);
        if (!std::isfinite(st.h)) return st;
        pw /= total;
        const Eigen::VectorXd mean = B_.transpose() * pw.matrix();
        st.grad = -kappa * mean;
        // covariance of the scenario payoffs under the tilted weights
        const Eigen::MatrixXd W = pw.sqrt().matrix().asDiagonal() * (B_.rowwise() - mean.transpose());
        const auto n = B_.cols();
        st.hess = Eigen::MatrixXd::Zero(n, n);
        st.hess.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
        st.hess *= kappa * kappa;
        return st;
    }

    // Without any constraint the problem is a plain Newton minimization.
    SolveResult unconstrained(Eigen::VectorXd y, State st) const {
        const auto n = y.size();
        double kkt = inf();
        for (int it = 0; it < opts_.max_iterations; ++it) {
            kkt = n == 0 ? 0.0 : st.grad.cwiseAbs().maxCoeff() / (1.0 + std::abs(st.h));
            if (kkt <= opts_.tol) return finish(y, SolveStatus::Optimal, it, kkt, 0.0);
            Eigen::MatrixXd M = st.hess.selfadjointView<Eigen::Lower>();
            M.diagonal().array() += 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
            const Eigen::VectorXd dy = M.ldlt().solve(-st.grad);
            double alpha = 1.0;
            bool accepted = false;
            State trial;
            for (int bt = 0; bt < 60; ++bt) {
                trial = evaluate(y + alpha * dy);
                if (std::isfinite(trial.h) &&
                    trial.h <= st.h + 1e-4 * alpha * st.grad.dot(dy) + 1e-13 * (1.0 + std::abs(st.h))) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted)
                return finish(y, kkt <= std::sqrt(opts_.tol) ? SolveStatus::Optimal : SolveStatus::NumericalFailure,
                              it, kkt, 0.0);
            y += alpha * dy;
            st = std::move(trial);
        }
        return finish(y, SolveStatus::IterationLimit, opts_.max_iterations, kkt, 0.0);
    }

    // Free columns (no bound on either side) that are combinations of other
    // free columns only add flat directions to h, which the barrier cannot pin
    // down; they are held at zero. When such a direction also changes the
    // budget use, the budget row can always be met by moving along it, so the
    // row is dropped from the barrier problem and restored in finish().
    void drop_redundant_free_columns() {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(vars_.size()); ++i)
            if (!has_lo(i) && !has_hi(i)) free.push_back(i);
        if (free.empty()) return;
        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd A(B_.rows(), nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const double nrm = B_.col(free[static_cast<std::size_t>(k)]).norm();
            A.col(k) = nrm > 0.0 ? (B_.col(free[static_cast<std::size_t>(k)]) / nrm).eval() : Eigen::VectorXd::Zero(B_.rows());
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.rows(), A.cols());
        qr.setThreshold(1e-10);
        qr.compute(A);
        const Eigen::Index r = qr.rank();
        if (r == nf) return;
        const auto& perm = qr.colsPermutation().indices();
        std::vector<Eigen::Index> keep_free, drop;
        for (Eigen::Index k = 0; k < nf; ++k)
            (k < r ? keep_free : drop).push_back(free[static_cast<std::size_t>(perm[k])]);

        // null vector of each held column: e_j - sum_i x_i e_i with B_keep x = B_j
        Eigen::MatrixXd Bk(B_.rows(), r);
        for (Eigen::Index i = 0; i < r; ++i) Bk.col(i) = B_.col(keep_free[static_cast<std::size_t>(i)]);
        const auto kqr = Bk.colPivHouseholderQr();
        const bool row_present = has_row_;
        Eigen::Index best = -1;
        double best_cost = 0.0;
        std::vector<Eigen::VectorXd> coef(drop.size());
        for (std::size_t k = 0; k < drop.size(); ++k) {
            coef[k] = r > 0 ? kqr.solve(B_.col(drop[k])).eval() : Eigen::VectorXd();
            double cost = g_[drop[k]];
            for (Eigen::Index i = 0; i < r; ++i) cost -= coef[k][i] * g_[keep_free[static_cast<std::size_t>(i)]];
            if (row_present && std::abs(cost) > 1e-9 * (std::abs(g_[drop[k]]) + 1.0) && std::abs(cost) > std::abs(best_cost)) {
                best = static_cast<Eigen::Index>(k);
                best_cost = cost;
            }
        }

        std::vector<bool> is_dropped(vars_.size(), false);
        for (auto j : drop) is_dropped[static_cast<std::size_t>(j)] = true;
        std::vector<Eigen::Index> kept;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(vars_.size()); ++i)
            if (!is_dropped[static_cast<std::size_t>(i)]) kept.push_back(i);
        std::vector<Eigen::Index> new_index(vars_.size(), -1);
        for (std::size_t i = 0; i < kept.size(); ++i) new_index[static_cast<std::size_t>(kept[i])] = static_cast<Eigen::Index>(i);

        if (best >= 0) {
            row_deferred_ = true;
            deferred_rhs_ = rhs_;
            has_row_ = false;
            const auto kb = static_cast<std::size_t>(best);
            flat_kept_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kept.size()));
            for (Eigen::Index i = 0; i < r; ++i)
                flat_kept_[new_index[static_cast<std::size_t>(keep_free[static_cast<std::size_t>(i)])]] = -coef[kb][i];
            flat_held_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(drop.size()));
            flat_held_[best] = 1.0;
        }

        held_d_.resize(static_cast<Eigen::Index>(drop.size()));
        held_g_.resize(static_cast<Eigen::Index>(drop.size()));
        for (std::size_t k = 0; k < drop.size(); ++k) {
            held_.push_back(vars_[static_cast<std::size_t>(drop[k])]);
            held_d_[static_cast<Eigen::Index>(k)] = d_[drop[k]];
            held_g_[static_cast<Eigen::Index>(k)] = g_[drop[k]];
        }
        std::vector<ReducedVar> vars;
        Eigen::MatrixXd B(B_.rows(), static_cast<Eigen::Index>(kept.size()));
        Eigen::VectorXd g(static_cast<Eigen::Index>(kept.size())), d(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            vars.push_back(vars_[static_cast<std::size_t>(kept[i])]);
            B.col(ii) = B_.col(kept[i]);
            g[ii] = g_[kept[i]];
            d[ii] = d_[kept[i]];
        }
        vars_ = std::move(vars);
        B_ = std::move(B);
        g_ = std::move(g);
        d_ = std::move(d);
    }

    [[nodiscard]] Eigen::VectorXd initial_point() const {
        const auto n = static_cast<Eigen::Index>(vars_.size());
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& v = vars_[static_cast<std::size_t>(i)];
            const bool lo = std::isfinite(v.lo), hi = std::isfinite(v.hi);
            const double unit = 1.0 / d_[i];
            if (v.lo < 0.0 && v.hi > 0.0) y[i] = 0.0;
            else if (lo && hi) y[i] = v.lo + std::min(unit, 0.5 * (v.hi - v.lo));
            else if (lo) y[i] = v.lo + unit;
            else if (hi) y[i] = v.hi - unit;
            else y[i] = 0.0;
        }
        if (!has_row_) return y;
        const double margin = std::max(1.0, 1e-3 * std::abs(p_.wealth()));
        double slack = rhs_ - g_.dot(y);
        if (slack < margin) {
            // borrow: push an unbounded negative-cost direction until the budget has room
            for (Eigen::Index i = 0; i < n && slack < margin; ++i) {
                const auto& v = vars_[static_cast<std::size_t>(i)];
                if (g_[i] < 0.0 && !std::isfinite(v.hi)) {
                    y[i] += (margin - slack) / -g_[i];
                } else if (g_[i] > 0.0 && !std::isfinite(v.lo)) {
                    y[i] -= (margin - slack) / g_[i];
                } else {
                    continue;
                }
                slack = rhs_ - g_.dot(y);
            }
            if (slack <= 0.0) throw SolverFailure("no strictly feasible starting point (budget cannot be met)");
        }
        return y;
    }

    [[nodiscard]] SolveResult finish(const Eigen::VectorXd& y, SolveStatus status, int iterations, double kkt,
                                     double gap) const {
        const auto J = static_cast<Eigen::Index>(p_.instrument_count());
        Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * J);
        auto place = [&](const ReducedVar& v, double value) {
            if (v.long_col >= 0 && v.short_col >= 0) {
                z[v.long_col] += std::max(value, 0.0);
                z[v.short_col] += std::max(-value, 0.0);
            } else if (v.long_col >= 0) {
                z[v.long_col] += std::max(value, 0.0);
            } else {
                z[v.short_col] += std::max(value, 0.0);
            }
        };
        Eigen::VectorXd yk = y;
        Eigen::VectorXd yh = Eigen::VectorXd::Zero(held_d_.size());
        if (row_deferred_ && g_.dot(yk) > deferred_rhs_) {
            const double t = (deferred_rhs_ - g_.dot(yk)) / (g_.dot(flat_kept_) + held_g_.dot(flat_held_));
            yk += t * flat_kept_;
            yh += t * flat_held_;
        }
        for (std::size_t i = 0; i < vars_.size(); ++i)
            place(vars_[i], yk[static_cast<Eigen::Index>(i)] * d_[static_cast<Eigen::Index>(i)]);
        for (std::size_t i = 0; i < held_.size(); ++i)
            place(held_[i], yh[static_cast<Eigen::Index>(i)] * held_d_[static_cast<Eigen::Index>(i)]);
        if (pivot_ >= 0) place(pivot_var_, (p_.wealth() - g_.dot(yk) - held_g_.dot(yh)) / pivot_cost_);
        // Netting a simultaneous long and short never raises cost or lowers payoff.
        for (Eigen::Index j = 0; j < J; ++j) {
            const double both = std::min(z[j], z[J + j]);
            if (both > 0.0) {
                z[j] -= both;
                z[J + j] -= both;
            }
        }
        SolveResult r;
        r.portfolio = SplitPortfolio::unstack(z);
        const double h = p_.log_objective(z);
        r.objective = std::exp(h);
        r.entropic_risk = std::isfinite(r.objective) && r.objective > 0.0 ? std::log(r.objective) : h;
        r.budget_slack = p_.wealth() - p_.budget_use(z);
        r.kkt_residual = kkt;
        r.duality_gap = gap;
        const Eigen::VectorXd sp = p_.scenario_payoffs(z);
        r.scenario_payoffs.assign(sp.data(), sp.data() + sp.size());
        r.status = std::isfinite(h) ? status : SolveStatus::NumericalFailure;
        r.iterations = iterations;
        return r;
    }
};

}  // namespace detail

inline SolveResult solve(const Problem& problem, const SolverOptions& opts = {}) {
    detail::InteriorPoint ip(problem, opts);
    return ip.run();
}

}  // namespace liqhedge
