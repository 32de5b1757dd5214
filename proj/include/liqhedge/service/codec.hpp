// SPDX-License-Identifier: Apache-2.0
//
// JSON codecs for the service and CLI. Field names are snake_case; errors
// name the offending field.
#pragma once

#include "liqhedge/bounds.hpp"
#include "liqhedge/claims.hpp"
#include "liqhedge/error.hpp"
#include "liqhedge/instruments.hpp"
#include "liqhedge/pricing.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/solver.hpp"
#include "liqhedge/sweeps.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace liqhedge::service {

using json = nlohmann::json;

namespace detail {

inline std::string join(const std::string& path, const std::string& field) {
    return path.empty() ? field : path + "." + field;
}

inline const json& require(const json& j, const std::string& field, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path.empty() ? "request body must be a JSON object" : path + ": expected an object");
    auto it = j.find(field);
    if (it == j.end()) throw ValidationError(join(path, field) + ": required field is missing");
    return *it;
}

inline double as_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    }
    throw ValidationError(where + ": expected a number");
}

inline double number(const json& j, const std::string& field, const std::string& path) {
    return as_number(require(j, field, path), join(path, field));
}

inline double number_or(const json& j, const std::string& field, double fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) return fallback;
    return as_number(j.at(field), join(path, field));
}

inline int integer_or(const json& j, const std::string& field, int fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) return fallback;
    const auto& v = j.at(field);
    if (!v.is_number_integer()) throw ValidationError(join(path, field) + ": expected an integer");
    return v.get<int>();
}

inline bool boolean_or(const json& j, const std::string& field, bool fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(field) || j.at(field).is_null()) return fallback;
    const auto& v = j.at(field);
    if (!v.is_boolean()) throw ValidationError(join(path, field) + ": expected true or false");
    return v.get<bool>();
}

inline std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

/// Finite values as numbers, everything else as null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace detail

inline ClaimSpec claim_from_json(const json& j, const std::string& path = "claim") {
    using detail::number;
    const auto& kind_v = detail::require(j, "kind", path);
    if (!kind_v.is_string()) throw ValidationError(path + ".kind: expected a string");
    const auto kind = kind_v.get<std::string>();
    try {
        if (kind == "call") return ClaimSpec::call(number(j, "strike", path));
        if (kind == "put") return ClaimSpec::put(number(j, "strike", path));
        if (kind == "digital") return ClaimSpec::digital(number(j, "strike", path), number(j, "amount", path));
        if (kind == "quadratic_forward") return ClaimSpec::quadratic_forward(number(j, "strike", path));
        if (kind == "log_forward") return ClaimSpec::log_forward(number(j, "strike", path), number(j, "scale", path));
        if (kind == "piecewise_linear")
            return ClaimSpec::piecewise_linear(detail::numbers(detail::require(j, "breakpoints", path), path + ".breakpoints"),
                                               detail::numbers(detail::require(j, "values", path), path + ".values"));
        if (kind == "constant") return ClaimSpec::constant(number(j, "value", path));
        if (kind == "scaled")
            return ClaimSpec::scaled(number(j, "multiplier", path),
                                     claim_from_json(detail::require(j, "claim", path), path + ".claim"));
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        if (msg.rfind(path, 0) == 0) throw;
        throw ValidationError(path + ": " + msg);
    }
    throw ValidationError(path + ".kind: unknown claim kind '" + kind +
                          "' (expected call, put, digital, quadratic_forward, log_forward, piecewise_linear, "
                          "constant or scaled)");
}

inline json claim_to_json(const ClaimSpec& c) {
    return std::visit(
        [](const auto& k) -> json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, claim::Call>) return {{"kind", "call"}, {"strike", k.strike}};
            else if constexpr (std::is_same_v<K, claim::Put>) return {{"kind", "put"}, {"strike", k.strike}};
            else if constexpr (std::is_same_v<K, claim::Digital>)
                return {{"kind", "digital"}, {"strike", k.strike}, {"amount", k.amount}};
            else if constexpr (std::is_same_v<K, claim::QuadraticForward>)
                return {{"kind", "quadratic_forward"}, {"strike", k.strike}};
            else if constexpr (std::is_same_v<K, claim::LogForward>)
                return {{"kind", "log_forward"}, {"strike", k.strike}, {"scale", k.scale}};
            else if constexpr (std::is_same_v<K, claim::PiecewiseLinear>)
                return {{"kind", "piecewise_linear"}, {"breakpoints", k.breakpoints}, {"values", k.values}};
            else if constexpr (std::is_same_v<K, claim::Constant>) return {{"kind", "constant"}, {"value", k.value}};
            else return {{"kind", "scaled"}, {"multiplier", k.multiplier}, {"claim", claim_to_json(*k.inner)}};
        },
        c.kind());
}

inline ViewModel view_from_json(const json& j, ViewModel base, const std::string& path = "view") {
    if (j.is_null()) return base;
    if (!j.is_object()) throw ValidationError(path + ": expected an object");
    base.mu = detail::number_or(j, "mu", base.mu, path);
    base.sigma = detail::number_or(j, "sigma", base.sigma, path);
    base.nu = detail::number_or(j, "nu", base.nu, path);
    base.spot = detail::number_or(j, "spot", base.spot, path);
    try {
        base.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return base;
}

inline json view_to_json(const ViewModel& v) {
    return {{"mu", v.mu}, {"sigma", v.sigma}, {"nu", std::isinf(v.nu) ? json("inf") : json(v.nu)}, {"spot", v.spot}};
}

inline GridOptions grid_from_json(const json& j, GridOptions base, const std::string& path = "grid") {
    if (j.is_null()) return base;
    base.panels = detail::integer_or(j, "panels", base.panels, path);
    base.nodes_per_panel = detail::integer_or(j, "nodes_per_panel", base.nodes_per_panel, path);
    base.tail_mass = detail::number_or(j, "tail_mass", base.tail_mass, path);
    base.tail_splits = detail::integer_or(j, "tail_splits", base.tail_splits, path);
    try {
        base.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return base;
}

inline json grid_to_json(const GridOptions& g) {
    return {{"panels", g.panels}, {"nodes_per_panel", g.nodes_per_panel}, {"tail_mass", g.tail_mass}, {"tail_splits", g.tail_splits}};
}

inline Interval interval_from_json(const json& j, Interval base = {}, const std::string& path = "interval") {
    if (j.is_null()) return base;
    base.lo = detail::number_or(j, "lo", base.lo, path);
    base.hi = detail::number_or(j, "hi", base.hi, path);
    try {
        base.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return base;
}

inline Liability liability_from_json(const json& j, const std::string& path = "liability") {
    Liability out;
    if (j.is_null()) return out;
    if (!j.is_array()) throw ValidationError(path + ": expected an array of {claim, quantity}");
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const double q = detail::number_or(j[i], "quantity", 1.0, p);
        if (!std::isfinite(q)) throw ValidationError(p + ".quantity: must be finite");
        out.add(claim_from_json(detail::require(j[i], "claim", p), p + ".claim"), q);
    }
    return out;
}

inline json liability_to_json(const Liability& l) {
    json out = json::array();
    for (const auto& t : l.terms()) out.push_back({{"claim", claim_to_json(t.claim)}, {"quantity", t.quantity}});
    return out;
}

/// One row per instrument: id, net units, side, and the split legs.
inline json portfolio_to_json(const QuoteBook& book, const SplitPortfolio& p, double flat_tol = 1e-9) {
    json rows = json::array();
    for (std::size_t j = 0; j < book.size() && j < p.size(); ++j) {
        const double net = p.net(j);
        const char* side = net > flat_tol ? "long" : (net < -flat_tol ? "short" : "flat");
        rows.push_back({{"instrument", book.instruments()[j].id},
                        {"net_units", net},
                        {"side", side},
                        {"long_units", p.long_units[j]},
                        {"short_units", p.short_units[j]}});
    }
    return rows;
}

/// Net units by instrument id; ids absent from the map are flat.
inline SplitPortfolio portfolio_from_json(const QuoteBook& book, const json& j, const std::string& path = "portfolio") {
    if (!j.is_object()) throw ValidationError(path + ": expected an object of instrument id to net units");
    std::vector<double> net(book.size(), 0.0);
    for (const auto& [id, v] : j.items()) {
        std::size_t idx = book.size();
        for (std::size_t k = 0; k < book.size(); ++k)
            if (book.instruments()[k].id == id) idx = k;
        if (idx == book.size()) throw ValidationError(path + "." + id + ": unknown instrument");
        net[idx] = detail::as_number(v, path + "." + id);
        const auto& q = book.quotes()[idx];
        if (!std::isfinite(net[idx]) || net[idx] > q.ask_depth || -net[idx] > q.bid_depth)
            throw ValidationError(path + "." + id + ": position outside the quoted depth");
    }
    return SplitPortfolio::from_net(net);
}

inline json solve_result_to_json(const QuoteBook& book, const SolveResult& r) {
    return {{"status", to_string(r.status)},
            {"objective", r.objective},
            {"entropic_risk", r.entropic_risk},
            {"kkt_residual", r.kkt_residual},
            {"duality_gap", r.duality_gap},
            {"budget_slack", r.budget_slack},
            {"iterations", r.iterations},
            {"portfolio", portfolio_to_json(book, r.portfolio)}};
}

inline json hedge_bound_to_json(const QuoteBook& book, const HedgeBoundResult& r) {
    return {{"cost", r.cost},
            {"portfolio", portfolio_to_json(book, r.portfolio)},
            {"binding_points", r.binding_points},
            {"verification_margin", r.verification_margin},
            {"rounds", r.rounds}};
}

inline json sweep_result_to_json(const SweepResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json params = json::object();
        for (std::size_t i = 0; i < r.param_names.size() && i < row.params.size(); ++i)
            params[r.param_names[i]] = row.params[i];
        rows.push_back({{"params", params},
                        {"sell_price", detail::num(row.sell_price)},
                        {"buy_price", detail::num(row.buy_price)},
                        {"entropic_risk", detail::num(row.entropic_risk)},
                        {"kkt_residual", detail::num(row.kkt_residual)},
                        {"iterations", row.iterations},
                        {"status", row.status},
                        {"message", row.message}});
    }
    return {{"param_names", r.param_names}, {"rows", rows}, {"timestamp", r.timestamp}, {"config_hash", r.config_hash}};
}

inline SweepSpec sweep_spec_from_json(const json& j) {
    SweepSpec s;
    const auto& p = detail::require(j, "parameter", "");
    if (!p.is_string()) throw ValidationError("parameter: expected a string");
    try {
        s.parameter = parse_sweep_parameter(p.get<std::string>());
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("parameter: ") + e.what());
    }
    if (j.contains("values")) s.values = detail::numbers(j.at("values"), "values");
    if (j.contains("mu_values")) s.mu_values = detail::numbers(j.at("mu_values"), "mu_values");
    if (j.contains("sigma_values")) s.sigma_values = detail::numbers(j.at("sigma_values"), "sigma_values");
    if (j.contains("target") && !j.at("target").is_null()) s.target = claim_from_json(j.at("target"), "target");
    const int workers = detail::integer_or(j, "workers", 0, "");
    if (workers < 0) throw ValidationError("workers: must be nonnegative");
    s.workers = static_cast<unsigned>(workers);
    s.validate();
    return s;
}

}  // namespace liqhedge::service
