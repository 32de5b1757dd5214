// SPDX-License-Identifier: Apache-2.0
//
// Synthetic quote books: Black-Scholes mid prices on a strike ladder with
// proportional spreads and uniform depth. Used by the tests, the samples and
// the `fixture` CLI command.
#pragma once

#include "liqhedge/instruments.hpp"
#include "liqhedge/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace liqhedge {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Black-Scholes price of a European call or put, no dividends.
inline double black_scholes(bool call, double spot, double strike, double rate, double vol, double T) {
    const double sd = vol * std::sqrt(T);
    const double d1 = (std::log(spot / strike) + (rate + 0.5 * vol * vol) * T) / sd;
    const double d2 = d1 - sd;
    const double df = std::exp(-rate * T);
    return call ? spot * normal_cdf(d1) - strike * df * normal_cdf(d2)
                : strike * df * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

struct SyntheticMarket {
    double spot = 2056.32;
    double maturity = 0.19;
    double lend_rate = 0.0043;
    double borrow_rate = 0.03;
    double bs_vol = 0.15;
    double first_strike = 1550.0;
    double strike_step = 25.0;
    int strike_count = 41;
    bool calls = true;
    bool puts = true;
    bool forward = true;
    double relative_spread = 0.01;  // (ask - bid) / mid
    double forward_spread = 0.25;   // K^a - K^b
    double depth_lots = 100.0;
    double lot_option = 100.0;
    double lot_forward = 50.0;
};

inline QuoteBook synthetic_book(const SyntheticMarket& m = {}) {
    std::vector<Instrument> ins;
    std::vector<Quote> qs;
    auto [cash, cq] = make_cash({m.borrow_rate, m.lend_rate});
    ins.push_back(cash);
    qs.push_back(cq);
    if (m.forward) {
        const double f = m.spot * std::exp(m.lend_rate * m.maturity);
        const double half = 0.5 * m.forward_spread;
        ins.push_back({"FWD", Forward{f + half, f - half}});
        const double d = m.depth_lots * m.lot_forward;
        qs.push_back({"FWD", 0.0, 0.0, d, d});
    }
    const double depth = m.depth_lots * m.lot_option;
    for (int i = 0; i < m.strike_count; ++i) {
        const double k = m.first_strike + m.strike_step * i;
        const std::string tag = std::to_string(static_cast<long long>(std::llround(k)));
        auto add = [&](bool is_call) {
            const double mid = black_scholes(is_call, m.spot, k, m.lend_rate, m.bs_vol, m.maturity);
            const std::string id = (is_call ? "C" : "P") + tag;
            if (is_call) ins.push_back({id, Call{k}});
            else ins.push_back({id, Put{k}});
            qs.push_back({id, mid * (1.0 - 0.5 * m.relative_spread), mid * (1.0 + 0.5 * m.relative_spread), depth, depth});
        };
        if (m.calls) add(true);
        if (m.puts) add(false);
    }
    return QuoteBook(std::move(ins), std::move(qs), m.spot, m.maturity);
}

/// Student t view with the historical-estimate parameters.
inline ViewModel reference_view(double spot = 2056.32) { return ViewModel{0.0, 0.0554, 4.8355, spot}; }

}  // namespace liqhedge
