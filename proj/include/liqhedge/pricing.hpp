// SPDX-License-Identifier: Apache-2.0
//
// Indifference prices.
//
// With phi(w, c) the optimal expected loss at initial cash w and liability c,
// the selling price of a claim is the least cash compensation w with
// phi(w_bar + w, c_bar + c) <= phi(w_bar, c_bar), and the buying price is the
// negative of the selling price of -c. w -> phi(w_bar + w, .) is strictly
// decreasing, so both are located by bisection on the log of phi.
#pragma once

#include "liqhedge/bounds.hpp"
#include "liqhedge/claims.hpp"
#include "liqhedge/error.hpp"
#include "liqhedge/instruments.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace liqhedge {

struct PricingOptions {
    double price_tol = 0.0;  // 0: 1e-4 x claim scale on the interval
    bool exclude_from_hedging = false;
    Interval interval;
    int max_expansions = 60;
};

/// Solver settings used for value-function evaluations inside the bisection.
inline SolverOptions pricing_solver_options() { return SolverOptions{1e-10, 300}; }

/// phi(w, c): optimal expected loss at initial cash `wealth`.
inline double value_function(const QuoteBook& book, const ScenarioGrid& grid, const Preferences& prefs,
                             const Liability& liability, double wealth, const SolverOptions& solver = {}) {
    auto r = solve(assemble(book, grid, prefs, liability).with_wealth(wealth), solver);
    if (!r.ok()) throw SolverFailure(std::string("value function solve ended with status ") + to_string(r.status));
    return r.objective;
}

struct SidePrice {
    double price = 0.0;
    SplitPortfolio hedge;  // optimal portfolio after the trade minus the baseline optimum
    SolveResult solve;     // optimum after the trade, at the feasible end of the final bracket
    int iterations = 0;
    std::array<double, 2> bracket{0.0, 0.0};
};

struct PriceResult {
    double sell_price = 0.0;
    double buy_price = 0.0;
    SplitPortfolio hedge_sell;
    SplitPortfolio hedge_buy;
    double baseline_value = 0.0;
    double baseline_risk = 0.0;
    int iterations = 0;
    std::array<double, 2> bracket{0.0, 0.0};
    std::array<double, 2> buy_bracket{0.0, 0.0};
    double price_tol = 0.0;
    std::vector<std::string> instrument_ids;  // of the hedging book actually used
    std::optional<std::string> excluded_instrument;
};

class IndifferencePricer {
public:
    IndifferencePricer(QuoteBook book, ScenarioGrid grid, Preferences prefs, Liability baseline = {},
                       SolverOptions solver = pricing_solver_options())
        : book_(std::move(book)),
          grid_(std::move(grid)),
          prefs_(prefs),
          baseline_liability_(std::move(baseline)),
          solver_(solver),
          problem_(assemble(book_, grid_, prefs_, baseline_liability_)) {
        baseline_ = checked(solve(problem_, solver_));
    }

    [[nodiscard]] const QuoteBook& book() const { return book_; }
    [[nodiscard]] const ScenarioGrid& grid() const { return grid_; }
    [[nodiscard]] const Preferences& preferences() const { return prefs_; }
    [[nodiscard]] const Liability& baseline_liability() const { return baseline_liability_; }
    [[nodiscard]] const SolveResult& baseline() const { return baseline_; }

    /// Optimum with liability c_bar + extra and initial cash w_bar + cash.
    [[nodiscard]] SolveResult solve_with(const Liability& extra, double cash) const {
        Liability total = baseline_liability_;
        for (const auto& t : extra.terms()) total.add(t.claim, t.quantity);
        return checked(solve(assemble(book_, grid_, prefs_, total).with_wealth(prefs_.wealth + cash), solver_));
    }

    [[nodiscard]] double price_tolerance(const ClaimSpec& c, const PricingOptions& opts) const {
        return opts.price_tol > 0.0 ? opts.price_tol : 1e-4 * c.scale(opts.interval.lo, opts.interval.hi);
    }

    [[nodiscard]] SidePrice sell(const ClaimSpec& c, const PricingOptions& opts = {}) const {
        const double tol = price_tolerance(c, opts);
        const double h0 = baseline_.entropic_risk;
        SidePrice out;
        std::optional<SolveResult> at_hi;
        auto risk_gap = [&](double w, std::optional<SolveResult>* keep) {
            ++out.iterations;
            auto r = solve_with(Liability(c), w);
            const double gap = r.entropic_risk - h0;
            if (keep && gap <= 0.0) *keep = std::move(r);
            return gap;
        };

        auto [lo, hi] = initial_bracket(c, opts, tol);
        // grow until [lo, hi] brackets the indifference level
        int expansions = 0;
        while (risk_gap(hi, &at_hi) > 0.0) {
            if (++expansions > opts.max_expansions) throw Unpriceable("selling price could not be bracketed");
            const double width = hi - lo;
            lo = hi;
            hi += 2.0 * width;
        }
        while (risk_gap(lo, nullptr) <= 0.0) {
            if (++expansions > opts.max_expansions) throw Unpriceable("selling price could not be bracketed");
            const double width = hi - lo;
            hi = lo;
            lo -= 2.0 * width;
            at_hi.reset();
        }
        if (!at_hi) (void)risk_gap(hi, &at_hi);
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            std::optional<SolveResult> r;
            if (risk_gap(mid, &r) <= 0.0) {
                hi = mid;
                at_hi = std::move(r);
            } else {
                lo = mid;
            }
        }
        out.price = 0.5 * (lo + hi);
        out.bracket = {lo, hi};
        out.solve = std::move(*at_hi);
        out.hedge = difference(out.solve.portfolio, baseline_.portfolio);
        return out;
    }

    [[nodiscard]] SidePrice buy(const ClaimSpec& c, const PricingOptions& opts = {}) const {
        PricingOptions o = opts;
        o.price_tol = price_tolerance(c, opts);
        SidePrice s = sell(c.negated(), o);
        s.price = -s.price;
        s.bracket = {-s.bracket[1], -s.bracket[0]};
        return s;
    }

    [[nodiscard]] PriceResult price(const ClaimSpec& c, const PricingOptions& opts = {}) const {
        if (opts.exclude_from_hedging) {
            if (auto id = quoted_match(book_, c)) {
                IndifferencePricer reduced(without_instrument(book_, *id), grid_, prefs_, baseline_liability_, solver_);
                PricingOptions o = opts;
                o.exclude_from_hedging = false;
                auto r = reduced.price(c, o);
                r.excluded_instrument = *id;
                return r;
            }
        }
        PriceResult r;
        r.price_tol = price_tolerance(c, opts);
        PricingOptions o = opts;
        o.price_tol = r.price_tol;
        auto s = sell(c, o);
        auto b = buy(c, o);
        r.sell_price = s.price;
        r.buy_price = b.price;
        r.hedge_sell = std::move(s.hedge);
        r.hedge_buy = std::move(b.hedge);
        r.bracket = s.bracket;
        r.buy_bracket = b.bracket;
        r.iterations = s.iterations + b.iterations;
        r.baseline_value = baseline_.objective;
        r.baseline_risk = baseline_.entropic_risk;
        for (const auto& in : book_.instruments()) r.instrument_ids.push_back(in.id);
        return r;
    }

private:
    QuoteBook book_;
    ScenarioGrid grid_;
    Preferences prefs_;
    Liability baseline_liability_;
    SolverOptions solver_;
    Problem problem_;
    SolveResult baseline_;

    static SolveResult checked(SolveResult r) {
        if (r.status == SolveStatus::NumericalFailure || (!r.ok() && !(r.kkt_residual <= 1e-6)))
            throw SolverFailure(std::string("portfolio solve ended with status ") + to_string(r.status));
        return r;
    }

    [[nodiscard]] std::pair<double, double> initial_bracket(const ClaimSpec& c, const PricingOptions& opts,
                                                            double tol) const {
        HedgeOptions ho;
        ho.interval = opts.interval;
        std::optional<double> sup, inf;
        try {
            sup = superhedge(book_, c, ho).cost;
        } catch (const InfeasibleHedge&) {
        }
        try {
            inf = subhedge(book_, c, ho).cost;
        } catch (const InfeasibleHedge&) {
        }
        const double scale = c.scale(opts.interval.lo, opts.interval.hi);
        const double spread = sup && inf ? std::abs(*sup - *inf) : scale;
        const double buf = std::max(10.0 * tol, 0.01 * spread);
        double lo = std::max(-0.5 * prefs_.wealth, inf ? *inf - buf : -scale);
        double hi = sup ? *sup + buf : scale;
        if (!(hi > lo)) hi = lo + std::max(buf, tol);
        return {lo, hi};
    }
};

struct BlReplication {
    double cost = 0.0;
    double anchor = 0.0;            // expansion point a: c(X) = c(a) + c'(a)(X - a) + calls
    double bond_units = 0.0;        // zero-coupon bonds paying 1 at maturity
    double underlying_units = 0.0;  // priced at spot
    std::vector<std::string> call_ids;
    std::vector<double> strikes;
    std::vector<double> weights;  // signed call quantities

    /// Payoff of the replicating portfolio at X_T = x.
    [[nodiscard]] double payoff(double x) const {
        double s = bond_units + underlying_units * x;
        for (std::size_t i = 0; i < strikes.size(); ++i) s += weights[i] * std::max(x - strikes[i], 0.0);
        return s;
    }
};

/// Static replication from the second-derivative measure of the claim,
/// discretized onto the quoted call strikes.
inline BlReplication bl_replication(const QuoteBook& book, const ClaimSpec& claim, const Interval& interval = {}) {
    interval.validate();
    if (!claim.is_continuous()) throw UnsupportedClaim("static replication needs a continuous payoff (got " + claim.kind_name() + ")");
    struct Q {
        double strike;
        std::size_t idx;
    };
    std::vector<Q> calls;
    for (std::size_t j = 0; j < book.size(); ++j)
        if (auto* c = std::get_if<Call>(&book.instruments()[j].kind)) calls.push_back({c->strike, j});
    std::sort(calls.begin(), calls.end(), [](const Q& a, const Q& b) { return a.strike < b.strike; });
    calls.erase(std::unique(calls.begin(), calls.end(), [](const Q& a, const Q& b) { return a.strike == b.strike; }),
                calls.end());
    if (calls.size() < 2) throw ValidationError("static replication needs at least two call strikes");

    BlReplication out;
    out.anchor = claim.finite_at_zero() ? 0.0 : interval.lo;
    const double a = out.anchor;
    const double value_a = claim(a);
    const double slope_a = claim.right_derivative(a);
    out.underlying_units = slope_a;
    out.bond_units = value_a - slope_a * a;

    // cell i collects the mass of dc' on (m_{i-1}, m_i]
    std::vector<double> edges{a};
    for (std::size_t i = 0; i + 1 < calls.size(); ++i) edges.push_back(0.5 * (calls[i].strike + calls[i + 1].strike));
    edges.push_back(std::max(interval.hi, calls.back().strike));
    const double r_lend = book.cash().rates.lend_rate;
    const double discount = std::exp(-r_lend * book.maturity());
    double cost = out.bond_units * discount + slope_a * book.spot();
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const double w = claim.right_derivative(edges[i + 1]) - claim.right_derivative(edges[i]);
        const auto& q = book.quotes()[calls[i].idx];
        out.call_ids.push_back(q.instrument_id);
        out.strikes.push_back(calls[i].strike);
        out.weights.push_back(w);
        cost += w > 0.0 ? w * q.ask_price : w * q.bid_price;
    }
    out.cost = cost;
    return out;
}

}  // namespace liqhedge
