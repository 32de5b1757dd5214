// SPDX-License-Identifier: Apache-2.0
//
// Super- and subhedging costs over a compact interval of the underlying.
//
// The hedge payoff is piecewise linear with kinks only at option strikes, so
// dominance of a claim whose deficit is concave between breakpoints is
// enforced exactly by constraints at the breakpoints. For the other claims
// the constraint set is refined and the returned hedge is checked on a finer
// grid; violated points are added back as cuts until the check passes.
#pragma once

#include "liqhedge/claims.hpp"
#include "liqhedge/error.hpp"
#include "liqhedge/instruments.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/simplex.hpp"
#include "liqhedge/solver.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace liqhedge {

struct Interval {
    double lo = 100.0;
    double hi = 5000.0;

    void validate() const {
        if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) throw ValidationError("interval needs 0 < lo < hi");
    }
};

/// Smallest interval holding every scenario node, so that dominance on it is almost-sure dominance
/// under the grid measure.
inline Interval covering(const ScenarioGrid& grid) {
    if (grid.empty()) throw ValidationError("scenario grid is empty");
    return {std::nextafter(grid.nodes.front(), 0.0), std::nextafter(grid.nodes.back(), INFINITY)};
}

struct HedgeOptions {
    Interval interval;
    int refine_per_gap = 8;
    double digital_eps = 1e-6;  // relative to the strike
    int verify_points = 0;      // 0: max(1000, 10 x constraint count)
    int max_rounds = 10;
    /// Explicit constraint grid. When set, no refinement or cuts are added.
    std::optional<std::vector<double>> constraint_points;
};

struct HedgeBoundResult {
    double cost = 0.0;
    SplitPortfolio portfolio;
    std::vector<double> binding_points;
    double verification_margin = 0.0;
    std::vector<double> constraint_points;
    /// Multipliers of the dominance rows; a discrete pricing measure over constraint_points.
    std::vector<double> duals;
    int rounds = 0;
};

/// Minimum over an even grid on the interval (plus the claim's kinks) of hedge payoff minus claim.
inline double verify_dominance(const QuoteBook& book, const SplitPortfolio& portfolio, const ClaimSpec& claim,
                               const Interval& interval, int grid_points) {
    interval.validate();
    if (grid_points < 1000) throw ValidationError("verification needs at least 1000 grid points");
    double worst = std::numeric_limits<double>::infinity();
    auto probe = [&](double x) { worst = std::min(worst, portfolio_payoff(book, portfolio, x) - claim(x)); };
    for (int i = 0; i < grid_points; ++i)
        probe(interval.lo + (interval.hi - interval.lo) * i / (grid_points - 1));
    for (double k : claim.kinks())
        if (k >= interval.lo && k <= interval.hi) probe(k);
    return worst;
}

namespace detail {

inline std::vector<double> dominance_grid(const QuoteBook& book, const ClaimSpec& claim, const HedgeOptions& opts) {
    const auto& iv = opts.interval;
    std::vector<double> pts{iv.lo, iv.hi};
    auto inside = [&](double x) { return x > iv.lo && x < iv.hi; };
    for (double k : book.strikes())
        if (inside(k)) pts.push_back(k);
    for (double k : claim.kinks())
        if (inside(k)) pts.push_back(k);
    for (double k : claim.jumps()) {
        const double left = k - opts.digital_eps * k;
        if (inside(k)) pts.push_back(k);
        if (inside(left)) pts.push_back(left);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        out.push_back(pts[i]);
        const double gap = pts[i + 1] - pts[i];
        if (gap <= 1e-3) continue;
        for (int r = 1; r <= opts.refine_per_gap; ++r) out.push_back(pts[i] + gap * r / (opts.refine_per_gap + 1));
    }
    out.push_back(pts.back());
    return out;
}

/// Local minima of the slack on the verification grid that fall below -tol.
inline std::vector<double> violated_points(const QuoteBook& book, const SplitPortfolio& portfolio,
                                           const ClaimSpec& claim, const Interval& iv, int n, double tol) {
    std::vector<double> xs(static_cast<std::size_t>(n)), sl(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        xs[static_cast<std::size_t>(i)] = iv.lo + (iv.hi - iv.lo) * i / (n - 1);
        sl[static_cast<std::size_t>(i)] = portfolio_payoff(book, portfolio, xs[static_cast<std::size_t>(i)]) -
                                          claim(xs[static_cast<std::size_t>(i)]);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (sl[i] >= -tol) continue;
        const bool left_ok = i == 0 || sl[i] <= sl[i - 1];
        const bool right_ok = i + 1 == xs.size() || sl[i] <= sl[i + 1];
        if (left_ok && right_ok) out.push_back(xs[i]);
    }
    return out;
}

}  // namespace detail

/// Least cost of a portfolio within the depth box whose payoff dominates the claim on the interval.
inline HedgeBoundResult superhedge(const QuoteBook& book, const ClaimSpec& claim, const HedgeOptions& opts = {}) {
    opts.interval.validate();
    const bool explicit_grid = opts.constraint_points.has_value();
    std::vector<double> pts = explicit_grid ? *opts.constraint_points : detail::dominance_grid(book, claim, opts);
    for (double x : pts)
        if (!(x > 0.0)) throw ValidationError("constraint points must be positive");
    const double scale = claim.scale(opts.interval.lo, opts.interval.hi);
    const double tol = 1e-6 * (1.0 + scale);
    const auto J = static_cast<Eigen::Index>(book.size());
    const double T = book.maturity();

    LinearProgram lp;
    lp.c.resize(2 * J);
    lp.upper.resize(2 * J);
    for (Eigen::Index j = 0; j < J; ++j) {
        const auto& q = book.quotes()[static_cast<std::size_t>(j)];
        lp.c[j] = q.ask_price;
        lp.c[J + j] = -q.bid_price;
        lp.upper[j] = q.ask_depth;
        lp.upper[J + j] = q.bid_depth;
    }

    HedgeBoundResult out;
    for (int round = 0;; ++round) {
        const auto m = static_cast<Eigen::Index>(pts.size());
        lp.A.resize(m, 2 * J);
        lp.b.resize(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const double x = pts[static_cast<std::size_t>(r)];
            for (Eigen::Index j = 0; j < J; ++j) {
                const auto& in = book.instruments()[static_cast<std::size_t>(j)];
                lp.A(r, j) = payoff_unit_long(in, x, T);
                lp.A(r, J + j) = payoff_unit_short(in, x, T);
            }
            lp.b[r] = claim(x);
        }
        const LpResult res = solve_lp(lp);
        if (res.status == LpStatus::Infeasible) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (Eigen::Index r = 0; r < res.row_slack.size(); ++r)
                if (res.row_slack[r] < 0.0) {
                    lo = std::min(lo, pts[static_cast<std::size_t>(r)]);
                    hi = std::max(hi, pts[static_cast<std::size_t>(r)]);
                }
            if (!std::isfinite(lo)) {
                lo = opts.interval.lo;
                hi = opts.interval.hi;
            }
            throw InfeasibleHedge("claim cannot be superhedged within the quoted depths on [" +
                                      std::to_string(lo) + ", " + std::to_string(hi) + "]",
                                  lo, hi);
        }
        if (res.status != LpStatus::Optimal) throw SolverFailure("hedging LP did not reach an optimum (status " + std::to_string(static_cast<int>(res.status)) + ", iterations " + std::to_string(res.iterations) + ")");

        out.portfolio = SplitPortfolio::unstack(res.x);
        out.cost = portfolio_cost(book, out.portfolio);
        out.constraint_points = pts;
        out.duals.assign(res.duals.data(), res.duals.data() + res.duals.size());
        out.binding_points.clear();
        for (Eigen::Index r = 0; r < m; ++r)
            if (res.row_slack[r] <= 1e-7 * (1.0 + scale)) out.binding_points.push_back(pts[static_cast<std::size_t>(r)]);
        out.rounds = round + 1;

        const int nv = opts.verify_points > 0 ? std::max(opts.verify_points, 1000)
                                              : std::max<int>(1000, 10 * static_cast<int>(pts.size()));
        out.verification_margin = verify_dominance(book, out.portfolio, claim, opts.interval, nv);
        if (explicit_grid || out.verification_margin >= -tol || round + 1 >= opts.max_rounds) break;
        auto cuts = detail::violated_points(book, out.portfolio, claim, opts.interval, nv, tol);
        if (cuts.empty()) break;
        pts.insert(pts.end(), cuts.begin(), cuts.end());
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    }
    return out;
}

/// Greatest revenue from a position that, together with the claim, is nonnegative on the interval:
/// the negative of the superhedging cost of -claim.
inline HedgeBoundResult subhedge(const QuoteBook& book, const ClaimSpec& claim, const HedgeOptions& opts = {}) {
    HedgeBoundResult r = superhedge(book, claim.negated(), opts);
    r.cost = -r.cost;
    return r;
}

}  // namespace liqhedge
