// SPDX-License-Identifier: Apache-2.0
//
// Sensitivity sweeps of indifference prices and entropic risk, and Monte
// Carlo payoff distributions of a fixed portfolio.
#pragma once

#include "liqhedge/claims.hpp"
#include "liqhedge/error.hpp"
#include "liqhedge/format.hpp"
#include "liqhedge/instruments.hpp"
#include "liqhedge/pricing.hpp"
#include "liqhedge/scenarios.hpp"
#include "liqhedge/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace liqhedge {

enum class SweepParameter { Sigma, Lambda, InitialPosition, Multiplier, MuSigmaGrid };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Sigma: return "sigma";
        case SweepParameter::Lambda: return "lambda";
        case SweepParameter::InitialPosition: return "initial_position_units";
        case SweepParameter::Multiplier: return "multiplier";
        case SweepParameter::MuSigmaGrid: return "mu_sigma_grid";
    }
    return "unknown";
}

inline SweepParameter parse_sweep_parameter(const std::string& s) {
    for (auto p : {SweepParameter::Sigma, SweepParameter::Lambda, SweepParameter::InitialPosition,
                   SweepParameter::Multiplier, SweepParameter::MuSigmaGrid})
        if (s == to_string(p)) return p;
    throw ValidationError("unknown sweep parameter '" + s + "'");
}

/// Everything a sweep point shares; each point rebuilds only what its parameter touches.
struct SweepContext {
    QuoteBook book;
    ViewModel view;
    GridOptions grid_options;
    Preferences prefs;
    Liability baseline;
    SolverOptions solver = pricing_solver_options();
    PricingOptions pricing;
};

struct SweepSpec {
    SweepParameter parameter = SweepParameter::Sigma;
    std::vector<double> values;     // 1-D sweeps
    std::vector<double> mu_values;  // mu_sigma_grid
    std::vector<double> sigma_values;
    std::optional<ClaimSpec> target;  // empty: portfolio risk only
    unsigned workers = 0;             // 0: hardware concurrency

    void validate() const {
        auto finite_sorted = [](const std::vector<double>& v, const char* what) {
            if (v.empty()) throw ValidationError(std::string(what) + " must be nonempty");
            for (double x : v)
                if (!std::isfinite(x)) throw ValidationError(std::string(what) + " must be finite");
            if (!std::is_sorted(v.begin(), v.end())) throw ValidationError(std::string(what) + " must be sorted");
        };
        if (parameter == SweepParameter::MuSigmaGrid) {
            finite_sorted(mu_values, "mu_values");
            finite_sorted(sigma_values, "sigma_values");
        } else {
            finite_sorted(values, "values");
        }
        if (!target && (parameter == SweepParameter::InitialPosition || parameter == SweepParameter::Multiplier))
            throw ValidationError(std::string(to_string(parameter)) + " sweep needs a target claim");
    }
};

struct SweepRow {
    std::vector<double> params;
    double sell_price = std::numeric_limits<double>::quiet_NaN();
    double buy_price = std::numeric_limits<double>::quiet_NaN();
    double entropic_risk = std::numeric_limits<double>::quiet_NaN();
    double kkt_residual = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::string status = "ok";  // or an error marker; failed points are kept
    std::string message;
};

struct SweepResult {
    std::vector<std::string> param_names;
    std::vector<SweepRow> rows;
    std::string timestamp;
    std::string config_hash;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string sweep_fingerprint(const SweepContext& ctx, const SweepSpec& spec) {
    std::ostringstream os;
    os << to_string(spec.parameter);
    for (const auto* v : {&spec.values, &spec.mu_values, &spec.sigma_values}) {
        os << '|';
        for (double x : *v) os << shortest(x) << ',';
    }
    os << '|' << (spec.target ? spec.target->kind_name() + ":" + shortest(spec.target->scale(100.0, 5000.0)) : "risk");
    os << '|' << shortest(ctx.view.mu) << ',' << shortest(ctx.view.sigma) << ',' << shortest(ctx.view.nu) << ','
       << shortest(ctx.view.spot);
    os << '|' << ctx.grid_options.panels << ',' << ctx.grid_options.nodes_per_panel << ','
       << shortest(ctx.grid_options.tail_mass) << ',' << ctx.grid_options.tail_splits;
    os << '|' << shortest(ctx.prefs.wealth) << ',' << shortest(ctx.prefs.risk_aversion) << ','
       << shortest(ctx.prefs.scale_wealth);
    for (const auto& q : ctx.book.quotes())
        os << '|' << q.instrument_id << ',' << shortest(q.bid_price) << ',' << shortest(q.ask_price) << ','
           << shortest(q.bid_depth) << ',' << shortest(q.ask_depth);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

inline std::string utc_timestamp() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline SweepRow evaluate_point(const SweepContext& ctx, const SweepSpec& spec, std::vector<double> params) {
    SweepRow row;
    row.params = params;
    try {
        ViewModel view = ctx.view;
        Preferences prefs = ctx.prefs;
        Liability baseline = ctx.baseline;
        std::optional<ClaimSpec> claim = spec.target;
        double per_unit = 1.0;
        const double v = params.front();
        switch (spec.parameter) {
            case SweepParameter::Sigma: view.sigma = v; break;
            case SweepParameter::Lambda: prefs.risk_aversion = v; break;
            case SweepParameter::InitialPosition: baseline.add(*claim, v); break;
            case SweepParameter::Multiplier:
                if (!(v > 0.0)) throw ValidationError("multiplier must be positive");
                claim = ClaimSpec::scaled(v, *claim);
                per_unit = v;
                break;
            case SweepParameter::MuSigmaGrid:
                view.mu = params[0];
                view.sigma = params[1];
                break;
        }
        prefs.validate();
        const ScenarioGrid grid = build_grid(view, ctx.grid_options);
        if (!claim) {
            const auto r = solve(assemble(ctx.book, grid, prefs, baseline), ctx.solver);
            row.entropic_risk = r.entropic_risk;
            row.kkt_residual = r.kkt_residual;
            row.iterations = r.iterations;
            if (!r.ok()) row.status = to_string(r.status);
            return row;
        }
        IndifferencePricer pricer(ctx.book, grid, prefs, baseline, ctx.solver);
        PricingOptions po = ctx.pricing;
        if (spec.parameter == SweepParameter::Multiplier && po.price_tol > 0.0) po.price_tol *= per_unit;
        const PriceResult p = pricer.price(*claim, po);
        row.sell_price = p.sell_price / per_unit;
        row.buy_price = p.buy_price / per_unit;
        row.entropic_risk = p.baseline_risk;
        row.kkt_residual = pricer.baseline().kkt_residual;
        row.iterations = p.iterations;
    } catch (const ValidationError& e) {
        row.status = "validation_error";
        row.message = e.what();
    } catch (const InfeasibleHedge& e) {
        row.status = "infeasible";
        row.message = e.what();
    } catch (const Unpriceable& e) {
        row.status = "unpriceable";
        row.message = e.what();
    } catch (const SolverFailure& e) {
        row.status = "solver_failure";
        row.message = e.what();
    } catch (const Error& e) {
        row.status = "error";
        row.message = e.what();
    }
    return row;
}

}  // namespace detail

/// Evaluates every point of the sweep on a bounded pool of threads. Rows come
/// back in input order; a failed point keeps its row with an error status.
inline SweepResult run_sweep(const SweepContext& ctx, const SweepSpec& spec) {
    spec.validate();
    ctx.view.validate();
    ctx.grid_options.validate();
    SweepResult out;
    std::vector<std::vector<double>> points;
    if (spec.parameter == SweepParameter::MuSigmaGrid) {
        out.param_names = {"mu", "sigma"};
        for (double m : spec.mu_values)
            for (double s : spec.sigma_values) points.push_back({m, s});
    } else {
        out.param_names = {to_string(spec.parameter)};
        for (double v : spec.values) points.push_back({v});
    }
    out.rows.resize(points.size());

    unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(points.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) out.rows[i] = detail::evaluate_point(ctx, spec, points[i]);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    out.timestamp = detail::utc_timestamp();
    out.config_hash = detail::sweep_fingerprint(ctx, spec);
    return out;
}

/// Header `<params>,sell_price,buy_price,entropic_risk,status`; values not
/// computed for a row are left empty.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    for (const auto& n : r.param_names) os << n << ',';
    os << "sell_price,buy_price,entropic_risk,status\n";
    auto cell = [](double x) { return std::isnan(x) ? std::string() : shortest(x); };
    for (const auto& row : r.rows) {
        for (double p : row.params) os << shortest(p) << ',';
        os << cell(row.sell_price) << ',' << cell(row.buy_price) << ',' << cell(row.entropic_risk) << ','
           << row.status << '\n';
    }
}

struct PayoffDistribution {
    std::vector<double> samples;
    std::vector<double> bin_edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
    double mean = 0.0;
    double percentile_1 = 0.0;
};

/// Net terminal payoff of `portfolio` on n draws of the view model.
inline PayoffDistribution payoff_distribution(const QuoteBook& book, const SplitPortfolio& portfolio,
                                              const ViewModel& model, std::size_t n, std::uint64_t seed,
                                              int bins = 50) {
    if (n < 10000) throw ValidationError("payoff distribution needs at least 10000 samples");
    if (bins < 1) throw ValidationError("bins must be >= 1");
    if (portfolio.size() != book.size()) throw ValidationError("portfolio does not match the quote book");
    PayoffDistribution d;
    const auto xs = sample(model, n, seed);
    d.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.samples[i] = portfolio_payoff(book, portfolio, xs[i]);
    double sum = 0.0;
    for (double v : d.samples) sum += v;
    d.mean = sum / static_cast<double>(n);
    std::vector<double> sorted = d.samples;
    const auto k = static_cast<std::size_t>(0.01 * static_cast<double>(n - 1));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    d.percentile_1 = sorted[k];

    const auto [lo_it, hi_it] = std::minmax_element(d.samples.begin(), d.samples.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        d.bin_edges = {lo, hi};
        d.counts = {n};
        return d;
    }
    d.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) d.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
    d.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : d.samples) {
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * bins);
        ++d.counts[std::min(b, static_cast<std::size_t>(bins) - 1)];
    }
    return d;
}

}  // namespace liqhedge
