// SPDX-License-Identifier: Apache-2.0
//
// Prices a digital on the synthetic ladder and prints the four reference
// numbers: subhedge cost, buy price, sell price, superhedge cost.

#include "liqhedge/bounds.hpp"
#include "liqhedge/pricing.hpp"
#include "liqhedge/synthetic.hpp"

#include <cstdio>

int main() {
    using namespace liqhedge;
    const QuoteBook book = synthetic_book();
    const ScenarioGrid grid = build_grid(reference_view());
    const Preferences prefs = Preferences::baseline(100000.0, 2.0);

    const ClaimSpec digital = ClaimSpec::digital(2050.0, 10000.0);
    const IndifferencePricer pricer(book, grid, prefs);
    const PriceResult p = pricer.price(digital);
    const double sup = superhedge(book, digital).cost;
    const double inf = subhedge(book, digital).cost;

    std::printf("baseline entropic risk %.10g\n", pricer.baseline().entropic_risk);
    std::printf("subhedge %.4f  buy %.4f  sell %.4f  superhedge %.4f  (tol %.3g)\n", inf, p.buy_price, p.sell_price,
                sup, p.price_tol);
    std::printf("hedge change after selling:\n");
    for (std::size_t j = 0; j < book.size(); ++j) {
        const double n = p.hedge_sell.net(j);
        if (n > 1e-6 || n < -1e-6) std::printf("  %-8s %12.4f\n", book.instruments()[j].id.c_str(), n);
    }
    return 0;
}
