// SPDX-License-Identifier: Apache-2.0
//
// Request engine shared by the HTTP service and the CLI. Every endpoint is a
// pure function of the loaded book, the session defaults and the request body.
#pragma once

#include "liqhedge/bounds.hpp"
#include "liqhedge/pricing.hpp"
#include "liqhedge/quote_io.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/service/codec.hpp"
#include "liqhedge/solver.hpp"
#include "liqhedge/sweeps.hpp"

#include <cstdint>
#include <atomic>
#include <deque>
#include <limits>
#include <sstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>

namespace liqhedge::service {

struct SessionConfig {
    std::string quote_file;
    MarketConfig market;
    ViewModel view;
    double risk_aversion = 2.0;
    double wealth = 100000.0;
    GridOptions grid;
    SolverOptions solver = pricing_solver_options();
    double price_tol = 0.0;  // 0: 1e-4 x claim scale
    std::uint64_t seed = 42;

    void validate() const {
        market.validate();
        view.validate();
        grid.validate();
        Preferences::baseline(wealth, risk_aversion).validate();
        if (!(solver.tol > 0.0) || solver.max_iterations < 1) throw ValidationError("solver tolerance and iteration cap must be positive");
        if (!(price_tol >= 0.0) || !std::isfinite(price_tol)) throw ValidationError("price tolerance must be nonnegative");
    }
};

/// Bounded map from canonical request text to response body. Readers share
/// the lock; inserts take it exclusively and evict the oldest entry.
class ResultCache {
public:
    explicit ResultCache(std::size_t capacity = 256) : capacity_(capacity) {}

    std::optional<json> get(const std::string& key) const {
        std::shared_lock lock(mu_);
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        ++hits_;
        return std::optional<json>(std::in_place, it->second);
    }

    void put(const std::string& key, json value) {
        if (capacity_ == 0) return;
        std::unique_lock lock(mu_);
        if (map_.count(key)) return;
        while (map_.size() >= capacity_) {
            map_.erase(order_.front());
            order_.pop_front();
        }
        map_.emplace(key, std::move(value));
        order_.push_back(key);
    }

    [[nodiscard]] std::size_t size() const {
        std::shared_lock lock(mu_);
        return map_.size();
    }
    [[nodiscard]] std::size_t hits() const { return hits_.load(); }

private:
    std::size_t capacity_;
    mutable std::shared_mutex mu_;
    std::unordered_map<std::string, json> map_;
    std::deque<std::string> order_;
    mutable std::atomic<std::size_t> hits_{0};
};

struct Response {
    int status = 200;
    json body;
};

class Engine {
public:
    Engine(QuoteBook book, SessionConfig cfg, std::size_t cache_capacity = 256)
        : book_(std::move(book)), cfg_(std::move(cfg)), cache_(cache_capacity) {
        cfg_.validate();
    }

    static Engine from_config(const SessionConfig& cfg) {
        cfg.validate();
        if (cfg.quote_file.empty()) throw ValidationError("quotes: a quote file is required");
        return Engine(load_quote_book(cfg.quote_file, cfg.market), cfg);
    }

    [[nodiscard]] const QuoteBook& book() const { return book_; }
    [[nodiscard]] const SessionConfig& config() const { return cfg_; }
    [[nodiscard]] const ResultCache& cache() const { return cache_; }

    /// GET /market
    [[nodiscard]] json market() const {
        json instruments = json::array();
        double smin = std::numeric_limits<double>::infinity(), smax = 0.0, ssum = 0.0, rsum = 0.0;
        std::size_t quoted = 0;
        for (std::size_t j = 0; j < book_.size(); ++j) {
            const auto& in = book_.instruments()[j];
            const auto& q = book_.quotes()[j];
            json row = {{"id", in.id},
                        {"bid_price", q.bid_price},
                        {"ask_price", q.ask_price},
                        {"bid_depth", detail::num(q.bid_depth)},
                        {"ask_depth", detail::num(q.ask_depth)}};
            double spread = q.spread(), mid = q.mid();
            if (in.is_cash()) {
                row["type"] = "cash";
            } else if (auto* f = std::get_if<Forward>(&in.kind)) {
                row["type"] = "forward";
                row["forward_bid"] = f->bid;
                row["forward_ask"] = f->ask;
                spread = f->ask - f->bid;
                mid = 0.5 * (f->ask + f->bid);
            } else {
                row["type"] = std::holds_alternative<Call>(in.kind) ? "call" : "put";
                row["strike"] = *in.strike();
            }
            if (!in.is_cash()) {
                smin = std::min(smin, spread);
                smax = std::max(smax, spread);
                ssum += spread;
                if (mid > 0.0) rsum += spread / mid;
                ++quoted;
            }
            instruments.push_back(std::move(row));
        }
        const double n = quoted ? static_cast<double>(quoted) : 1.0;
        return {{"instrument_count", book_.size()},
                {"spot", book_.spot()},
                {"maturity_years", book_.maturity()},
                {"lend_rate", cfg_.market.lend_rate},
                {"borrow_rate", cfg_.market.borrow_rate},
                {"spread_statistics",
                 {{"quoted_instruments", quoted},
                  {"min", quoted ? smin : 0.0},
                  {"max", smax},
                  {"mean", ssum / n},
                  {"mean_relative", rsum / n}}},
                {"instruments", instruments}};
    }

    /// POST /solve
    [[nodiscard]] json solve(const json& req) const {
        return cached("solve", req, [&] {
            const auto ctx = context(req);
            const auto grid = build_grid(ctx.view, ctx.grid);
            const auto r = liqhedge::solve(assemble(book_, grid, ctx.prefs, ctx.liability), ctx.solver);
            if (!r.ok()) throw SolverFailure(std::string("solve ended with status ") + to_string(r.status));
            json out = solve_result_to_json(book_, r);
            out["tolerances"] = tolerances(ctx, std::nullopt);
            return out;
        });
    }

    /// POST /price
    [[nodiscard]] json price(const json& req) const {
        return cached("price", req, [&] {
            const auto ctx = context(req);
            const ClaimSpec claim = claim_from_json(detail::require(req, "claim", ""));
            PricingOptions po;
            po.exclude_from_hedging = detail::boolean_or(req, "exclude_from_hedging", false, "");
            po.price_tol = detail::number_or(req, "price_tol", cfg_.price_tol, "");
            if (!(po.price_tol >= 0.0) || !std::isfinite(po.price_tol)) throw ValidationError("price_tol: must be nonnegative");
            po.interval = interval_from_json(req.value("interval", json()));
            po.max_expansions = detail::integer_or(req, "max_expansions", po.max_expansions, "");
            const IndifferencePricer pricer(book_, build_grid(ctx.view, ctx.grid), ctx.prefs, ctx.liability, ctx.solver);
            const PriceResult p = pricer.price(claim, po);
            const QuoteBook hedge_book =
                p.excluded_instrument ? without_instrument(book_, *p.excluded_instrument) : book_;
            json out = {{"claim", claim_to_json(claim)},
                        {"sell_price", p.sell_price},
                        {"buy_price", p.buy_price},
                        {"hedge_sell", portfolio_to_json(hedge_book, p.hedge_sell)},
                        {"hedge_buy", portfolio_to_json(hedge_book, p.hedge_buy)},
                        {"baseline_value", p.baseline_value},
                        {"baseline_risk", p.baseline_risk},
                        {"iterations", p.iterations},
                        {"sell_bracket", p.bracket},
                        {"buy_bracket", p.buy_bracket},
                        {"instrument_ids", p.instrument_ids},
                        {"excluded_instrument", p.excluded_instrument ? json(*p.excluded_instrument) : json(nullptr)}};
            out["tolerances"] = tolerances(ctx, p.price_tol);
            return out;
        });
    }

    /// POST /bounds
    [[nodiscard]] json bounds(const json& req) const {
        return cached("bounds", req, [&] {
            const ClaimSpec claim = claim_from_json(detail::require(req, "claim", ""));
            HedgeOptions ho;
            ho.interval = interval_from_json(req.value("interval", json()));
            ho.refine_per_gap = detail::integer_or(req, "refine_per_gap", ho.refine_per_gap, "");
            if (ho.refine_per_gap < 0) throw ValidationError("refine_per_gap: must be nonnegative");
            const auto sup = superhedge(book_, claim, ho);
            const auto inf = subhedge(book_, claim, ho);
            return json{{"claim", claim_to_json(claim)},
                        {"interval", {{"lo", ho.interval.lo}, {"hi", ho.interval.hi}}},
                        {"superhedge", hedge_bound_to_json(book_, sup)},
                        {"subhedge", hedge_bound_to_json(book_, inf)}};
        });
    }

    /// Typed sweep, shared by POST /sweep and the CLI.
    [[nodiscard]] SweepResult sweep_result(const json& req) const {
        const auto ctx = context(req);
        const SweepSpec spec = sweep_spec_from_json(req);
        SweepContext sc{book_, ctx.view, ctx.grid, ctx.prefs, ctx.liability, ctx.solver, {}};
        sc.pricing.price_tol = detail::number_or(req, "price_tol", cfg_.price_tol, "");
        sc.pricing.exclude_from_hedging = detail::boolean_or(req, "exclude_from_hedging", false, "");
        return run_sweep(sc, spec);
    }

    /// POST /sweep
    [[nodiscard]] json sweep(const json& req) const {
        const auto ctx = context(req);
        const auto r = sweep_result(req);
        std::ostringstream csv;
        write_sweep_csv(csv, r);
        json out = sweep_result_to_json(r);
        out["csv"] = csv.str();
        out["tolerances"] = tolerances(ctx, std::nullopt);
        return out;
    }

    /// POST /distribution
    [[nodiscard]] json distribution(const json& req) const {
        const auto ctx = context(req);
        const auto n = static_cast<std::size_t>(detail::number_or(req, "n", 10000.0, ""));
        const auto seed = static_cast<std::uint64_t>(detail::number_or(req, "seed", static_cast<double>(cfg_.seed), ""));
        const int bins = detail::integer_or(req, "bins", 50, "");
        SplitPortfolio portfolio;
        const json pj = req.value("portfolio", json("optimal"));
        if (pj.is_string() && pj.get<std::string>() == "optimal") {
            const auto r = liqhedge::solve(assemble(book_, build_grid(ctx.view, ctx.grid), ctx.prefs, ctx.liability), ctx.solver);
            if (!r.ok()) throw SolverFailure(std::string("solve ended with status ") + to_string(r.status));
            portfolio = r.portfolio;
        } else {
            portfolio = portfolio_from_json(book_, pj);
        }
        const auto d = payoff_distribution(book_, portfolio, ctx.view, n, seed, bins);
        json out = {{"n", n},
                    {"seed", seed},
                    {"mean", d.mean},
                    {"percentile_1", d.percentile_1},
                    {"bin_edges", d.bin_edges},
                    {"counts", d.counts},
                    {"portfolio", portfolio_to_json(book_, portfolio)}};
        if (detail::boolean_or(req, "include_samples", false, "")) out["samples"] = d.samples;
        return out;
    }

    /// Dispatches one request and maps engine errors to HTTP status codes.
    [[nodiscard]] Response handle(const std::string& method, const std::string& path, const std::string& body) const {
        try {
            if (method == "GET" && path == "/market") return {200, market()};
            if (method != "POST") return error(405, "method_not_allowed", method + " " + path);
            json req = body.empty() ? json::object() : json::parse(body);
            if (!req.is_object()) throw ValidationError("request body must be a JSON object");
            if (path == "/solve") return {200, solve(req)};
            if (path == "/price") return {200, price(req)};
            if (path == "/bounds") return {200, bounds(req)};
            if (path == "/sweep") return {200, sweep(req)};
            if (path == "/distribution") return {200, distribution(req)};
            return error(404, "not_found", path);
        } catch (const json::exception& e) {
            return error(400, "validation_error", e.what());
        } catch (const ValidationError& e) {
            return error(400, "validation_error", e.what());
        } catch (const DomainError& e) {
            return error(400, "domain_error", e.what());
        } catch (const InfeasibleHedge& e) {
            Response r = error(422, "infeasible", e.what());
            r.body["error"]["region"] = {e.region_lo(), e.region_hi()};
            return r;
        } catch (const Unpriceable& e) {
            return error(422, "unpriceable", e.what());
        } catch (const SolverFailure& e) {
            return error(500, "solver_failure", e.what());
        } catch (const std::exception& e) {
            return error(500, "internal_error", e.what());
        }
    }

private:
    struct Context {
        ViewModel view;
        Preferences prefs;
        GridOptions grid;
        SolverOptions solver;
        Liability liability;
    };

    QuoteBook book_;
    SessionConfig cfg_;
    mutable ResultCache cache_;

    [[nodiscard]] Context context(const json& req) const {
        if (!req.is_object()) throw ValidationError("request body must be a JSON object");
        Context c;
        c.view = view_from_json(req.value("view", json()), cfg_.view);
        c.prefs = Preferences::baseline(detail::number_or(req, "wealth", cfg_.wealth, ""),
                                        detail::number_or(req, "lambda", cfg_.risk_aversion, ""));
        try {
            c.prefs.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("preferences: ") + e.what());
        }
        c.grid = grid_from_json(req.value("grid", json()), cfg_.grid);
        c.solver = cfg_.solver;
        if (req.contains("solver")) {
            c.solver.tol = detail::number_or(req.at("solver"), "tol", c.solver.tol, "solver");
            c.solver.max_iterations = detail::integer_or(req.at("solver"), "max_iterations", c.solver.max_iterations, "solver");
            if (!(c.solver.tol > 0.0) || c.solver.max_iterations < 1)
                throw ValidationError("solver: tol and max_iterations must be positive");
        }
        c.liability = liability_from_json(req.value("liability", json()));
        return c;
    }

    [[nodiscard]] static json tolerances(const Context& c, std::optional<double> price_tol) {
        json t = {{"solver_tol", c.solver.tol}, {"max_iterations", c.solver.max_iterations}, {"grid", grid_to_json(c.grid)},
                  {"view", view_to_json(c.view)}, {"lambda", c.prefs.risk_aversion}, {"wealth", c.prefs.wealth}};
        if (price_tol) t["price_tol"] = *price_tol;
        return t;
    }

    template <class F>
    json cached(const char* endpoint, const json& req, F&& compute) const {
        const std::string key = std::string(endpoint) + '\n' + req.dump();
        if (auto hit = cache_.get(key)) return *hit;
        json out = compute();
        cache_.put(key, out);
        return out;
    }

    static Response error(int status, const std::string& type, const std::string& message) {
        return {status, {{"error", {{"type", type}, {"message", message}}}}};
    }
};

}  // namespace liqhedge::service
