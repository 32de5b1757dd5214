// SPDX-License-Identifier: Apache-2.0
//
// liqhedge: command-line front end and JSON service.
//
// Exit codes: 0 success, 2 validation error, 3 solver failure (including
// infeasible hedges and unpriceable claims).

#include "liqhedge/format.hpp"
#include "liqhedge/quote_io.hpp"
#include "liqhedge/service/engine.hpp"
#include "liqhedge/service/http.hpp"
#include "liqhedge/synthetic.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using liqhedge::service::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct Flags {
    std::string config_file;
    std::string quotes;
    std::optional<double> spot, maturity, lend, borrow, lot_forward, lot_option;
    std::optional<double> mu, sigma, lambda, wealth, tol_price;
    std::optional<std::string> nu;
    std::optional<std::uint64_t> seed;
    std::optional<int> panels, nodes;
    std::optional<double> tail_mass;
    std::optional<int> tail_splits;
    bool json_output = false;
};

double parse_config_number(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw liqhedge::ValidationError("config " + key + ": expected a number, got '" + it->second + "'");
    }
}

/// Config file first, then flags on top.
liqhedge::service::SessionConfig session_from(const Flags& f) {
    liqhedge::service::SessionConfig s;
    s.view = liqhedge::reference_view();
    std::map<std::string, std::string> kv;
    if (!f.config_file.empty()) {
        std::ifstream in(f.config_file);
        if (!in) throw liqhedge::ValidationError("cannot open config file " + f.config_file);
        kv = liqhedge::read_key_values(in);
        s.market = liqhedge::market_config_from(kv);
        if (auto it = kv.find("quotes"); it != kv.end()) {
            s.quote_file = it->second;
            // relative to the config file
            if (!s.quote_file.empty() && s.quote_file.front() != '/') {
                const auto slash = f.config_file.rfind('/');
                if (slash != std::string::npos) s.quote_file = f.config_file.substr(0, slash + 1) + s.quote_file;
            }
        }
        s.view.mu = parse_config_number(kv, "mu", s.view.mu);
        s.view.sigma = parse_config_number(kv, "sigma", s.view.sigma);
        s.view.nu = parse_config_number(kv, "nu", s.view.nu);
        s.risk_aversion = parse_config_number(kv, "lambda", s.risk_aversion);
        s.wealth = parse_config_number(kv, "wealth", s.wealth);
        s.price_tol = parse_config_number(kv, "tol_price", s.price_tol);
        s.seed = static_cast<std::uint64_t>(parse_config_number(kv, "seed", static_cast<double>(s.seed)));
        s.grid.panels = static_cast<int>(parse_config_number(kv, "panels", s.grid.panels));
        s.grid.nodes_per_panel = static_cast<int>(parse_config_number(kv, "nodes_per_panel", s.grid.nodes_per_panel));
        s.grid.tail_mass = parse_config_number(kv, "tail_mass", s.grid.tail_mass);
        s.grid.tail_splits = static_cast<int>(parse_config_number(kv, "tail_splits", s.grid.tail_splits));
    }
    if (!f.quotes.empty()) s.quote_file = f.quotes;
    if (f.spot) s.market.spot = *f.spot;
    if (f.maturity) s.market.maturity_years = *f.maturity;
    if (f.lend) s.market.lend_rate = *f.lend;
    if (f.borrow) s.market.borrow_rate = *f.borrow;
    if (f.lot_forward) s.market.lot_forward = *f.lot_forward;
    if (f.lot_option) s.market.lot_option = *f.lot_option;
    if (f.mu) s.view.mu = *f.mu;
    if (f.sigma) s.view.sigma = *f.sigma;
    if (f.nu) {
        if (*f.nu == "inf") {
            s.view.nu = std::numeric_limits<double>::infinity();
        } else {
            try {
                s.view.nu = std::stod(*f.nu);
            } catch (const std::exception&) {
                throw liqhedge::ValidationError("--nu: expected a number or 'inf'");
            }
        }
    }
    if (f.lambda) s.risk_aversion = *f.lambda;
    if (f.wealth) s.wealth = *f.wealth;
    if (f.tol_price) s.price_tol = *f.tol_price;
    if (f.seed) s.seed = *f.seed;
    if (f.panels) s.grid.panels = *f.panels;
    if (f.nodes) s.grid.nodes_per_panel = *f.nodes;
    if (f.tail_mass) s.grid.tail_mass = *f.tail_mass;
    if (f.tail_splits) s.grid.tail_splits = *f.tail_splits;
    s.view.spot = s.market.spot;
    if (s.quote_file.empty()) throw liqhedge::ValidationError("--quotes: a quote file is required");
    s.validate();
    return s;
}

json read_json_arg(const std::string& inline_text, const std::string& path, const char* what) {
    if (!inline_text.empty() && !path.empty())
        throw liqhedge::ValidationError(std::string(what) + ": give either the inline JSON or the file, not both");
    std::string text = inline_text;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw liqhedge::ValidationError(std::string(what) + ": cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (text.empty()) return json();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw liqhedge::ValidationError(std::string(what) + ": " + e.what());
    }
}

std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << x;
    return os.str();
}

void print_portfolio(std::ostream& os, const json& rows) {
    os << std::left << std::setw(12) << "instrument" << std::right << std::setw(18) << "net_units" << "  side\n";
    for (const auto& r : rows) {
        // legs below the printed precision are noise from the difference of two optima
        if (std::abs(r.at("net_units").get<double>()) < 5e-5) continue;
        os << std::left << std::setw(12) << r.at("instrument").get<std::string>() << std::right << std::setw(18)
           << fmt(r.at("net_units").get<double>(), 4) << "  " << r.at("side").get<std::string>() << '\n';
    }
}

void print_solve(std::ostream& os, const json& r) {
    print_portfolio(os, r.at("portfolio"));
    os << "entropic_risk  " << liqhedge::shortest(r.at("entropic_risk").get<double>()) << '\n'
       << "objective      " << liqhedge::shortest(r.at("objective").get<double>()) << '\n'
       << "kkt_residual   " << liqhedge::shortest(r.at("kkt_residual").get<double>()) << '\n'
       << "iterations     " << r.at("iterations").get<int>() << '\n'
       << "status         " << r.at("status").get<std::string>() << '\n';
}

void emit(const json& out, bool as_json, void (*print)(std::ostream&, const json&)) {
    if (as_json) std::cout << out.dump(2) << '\n';
    else print(std::cout, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Static hedging and indifference pricing under finite liquidity"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config_file, "key = value session config file");
    app.add_option("--quotes", f.quotes, "quote CSV");
    app.add_option("--spot", f.spot, "spot level of the underlying");
    app.add_option("--maturity", f.maturity, "time to maturity in years");
    app.add_option("--lend", f.lend, "lending rate r^b");
    app.add_option("--borrow", f.borrow, "borrowing rate r^a");
    app.add_option("--lot-forward", f.lot_forward, "units per forward lot (default 50)");
    app.add_option("--lot-option", f.lot_option, "units per option lot (default 100)");
    app.add_option("--mu", f.mu, "location of the log-return view (default 0)");
    app.add_option("--sigma", f.sigma, "scale of the log-return view (default 0.0554)");
    app.add_option("--nu", f.nu, "Student t degrees of freedom, or inf for Gaussian (default 4.8355)");
    app.add_option("--lambda", f.lambda, "risk aversion (default 2)");
    app.add_option("--wealth", f.wealth, "initial cash (default 100000)");
    app.add_option("--tol-price", f.tol_price, "price tolerance; 0 means 1e-4 x claim scale");
    app.add_option("--seed", f.seed, "seed for Monte Carlo output (default 42)");
    app.add_option("--panels", f.panels, "quadrature panels (default 50)");
    app.add_option("--nodes", f.nodes, "nodes per panel (default 20)");
    app.add_option("--tail-mass", f.tail_mass, "probability cut from each tail (default 1e-6)");
    app.add_option("--tail-splits", f.tail_splits, "halvings of each outermost panel (default 6)");
    app.add_flag("--json", f.json_output, "print the engine's JSON response instead of a report");

    std::string liability_text, liability_file;
    auto* optimize = app.add_subcommand("optimize", "optimal hedge portfolio for the current liability");
    optimize->add_option("--liability", liability_text, "JSON array of {claim, quantity}");
    optimize->add_option("--liability-file", liability_file, "file holding the liability JSON");

    std::string claim_text, claim_file;
    bool exclude = false;
    std::optional<double> lo, hi;
    auto* price = app.add_subcommand("price", "buy and sell indifference prices of a claim");
    price->add_option("--claim", claim_text, "claim JSON, e.g. {\"kind\":\"call\",\"strike\":2050}");
    price->add_option("--claim-file", claim_file, "file holding the claim JSON");
    price->add_flag("--exclude-from-hedging", exclude, "drop the matching quoted option from the hedging set");
    price->add_option("--lo", lo, "lower end of the payoff interval (default 100)");
    price->add_option("--hi", hi, "upper end of the payoff interval (default 5000)");

    auto* bounds = app.add_subcommand("bounds", "superhedging and subhedging costs of a claim");
    bounds->add_option("--claim", claim_text, "claim JSON");
    bounds->add_option("--claim-file", claim_file, "file holding the claim JSON");
    bounds->add_option("--lo", lo, "lower end of the dominance interval (default 100)");
    bounds->add_option("--hi", hi, "upper end of the dominance interval (default 5000)");

    std::string spec_text, spec_file, out_path;
    auto* sweep = app.add_subcommand("sweep", "price or risk sweep written as CSV");
    sweep->add_option("--spec", spec_text, "sweep JSON, e.g. {\"parameter\":\"lambda\",\"values\":[1,2]}");
    sweep->add_option("--spec-file", spec_file, "file holding the sweep JSON");
    sweep->add_option("--out", out_path, "CSV output path (default standard output)");

    std::string bind = "127.0.0.1:8080";
    auto* serve = app.add_subcommand("serve", "JSON-over-HTTP service");
    serve->add_option("--bind", bind, "ADDR:PORT");

    liqhedge::SyntheticMarket fixture_market;
    std::string fixture_out;
    auto* fixture = app.add_subcommand("fixture", "write the synthetic quote book as CSV");
    fixture->add_option("--out", fixture_out, "output path (default standard output)");
    fixture->add_option("--spread", fixture_market.relative_spread, "relative bid-ask spread (default 0.01)");
    fixture->add_option("--depth-lots", fixture_market.depth_lots, "depth per side in lots (default 100)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (fixture->parsed()) {
            const auto book = liqhedge::synthetic_book(fixture_market);
            liqhedge::MarketConfig cfg;
            cfg.lot_forward = fixture_market.lot_forward;
            cfg.lot_option = fixture_market.lot_option;
            if (fixture_out.empty()) {
                liqhedge::write_quote_book(std::cout, book, cfg);
            } else {
                std::ofstream out(fixture_out);
                if (!out) throw liqhedge::ValidationError("cannot write " + fixture_out);
                liqhedge::write_quote_book(out, book, cfg);
            }
            return kExitOk;
        }

        const auto session = session_from(f);
        const auto engine = liqhedge::service::Engine::from_config(session);

        if (optimize->parsed()) {
            json req = json::object();
            if (auto l = read_json_arg(liability_text, liability_file, "--liability"); !l.is_null()) req["liability"] = l;
            emit(engine.solve(req), f.json_output, print_solve);
        } else if (price->parsed()) {
            json req = {{"claim", read_json_arg(claim_text, claim_file, "--claim")}, {"exclude_from_hedging", exclude}};
            if (req["claim"].is_null()) throw liqhedge::ValidationError("--claim: a claim is required");
            if (lo || hi) req["interval"] = {{"lo", lo.value_or(100.0)}, {"hi", hi.value_or(5000.0)}};
            emit(engine.price(req), f.json_output, [](std::ostream& os, const json& r) {
                os << "sell_price     " << liqhedge::shortest(r.at("sell_price").get<double>()) << '\n'
                   << "buy_price      " << liqhedge::shortest(r.at("buy_price").get<double>()) << '\n'
                   << "price_tol      " << liqhedge::shortest(r.at("tolerances").at("price_tol").get<double>()) << '\n'
                   << "baseline_risk  " << liqhedge::shortest(r.at("baseline_risk").get<double>()) << '\n'
                   << "hedge after selling (change from baseline)\n";
                print_portfolio(os, r.at("hedge_sell"));
                os << "hedge after buying (change from baseline)\n";
                print_portfolio(os, r.at("hedge_buy"));
            });
        } else if (bounds->parsed()) {
            json req = {{"claim", read_json_arg(claim_text, claim_file, "--claim")}};
            if (req["claim"].is_null()) throw liqhedge::ValidationError("--claim: a claim is required");
            if (lo || hi) req["interval"] = {{"lo", lo.value_or(100.0)}, {"hi", hi.value_or(5000.0)}};
            emit(engine.bounds(req), f.json_output, [](std::ostream& os, const json& r) {
                os << "superhedge_cost  " << liqhedge::shortest(r.at("superhedge").at("cost").get<double>()) << '\n';
                print_portfolio(os, r.at("superhedge").at("portfolio"));
                os << "subhedge_cost    " << liqhedge::shortest(r.at("subhedge").at("cost").get<double>()) << '\n';
                print_portfolio(os, r.at("subhedge").at("portfolio"));
            });
        } else if (sweep->parsed()) {
            const json req = read_json_arg(spec_text, spec_file, "--spec");
            if (req.is_null()) throw liqhedge::ValidationError("--spec: a sweep spec is required");
            const auto result = engine.sweep_result(req);
            if (out_path.empty()) {
                liqhedge::write_sweep_csv(std::cout, result);
            } else {
                std::ofstream out(out_path);
                if (!out) throw liqhedge::ValidationError("cannot write " + out_path);
                liqhedge::write_sweep_csv(out, result);
            }
            std::cerr << "timestamp " << result.timestamp << " config_hash " << result.config_hash << '\n';
            for (const auto& row : result.rows)
                if (row.status != "ok") std::cerr << "point " << liqhedge::shortest(row.params.front()) << ": " << row.message << '\n';
        } else if (serve->parsed()) {
            const auto [host, port] = liqhedge::service::parse_bind(bind);
            httplib::Server server;
            liqhedge::service::register_routes(server, engine);
            std::cerr << "listening on " << host << ':' << port << '\n';
            if (!server.listen(host, port)) {
                std::cerr << "error: cannot bind " << bind << '\n';
                return kExitValidation;
            }
        }
        return kExitOk;
    } catch (const liqhedge::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const liqhedge::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const liqhedge::InfeasibleHedge& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kExitSolver;
    } catch (const liqhedge::Unpriceable& e) {
        std::cerr << "unpriceable: " << e.what() << '\n';
        return kExitSolver;
    } catch (const liqhedge::SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolver;
    }
}
