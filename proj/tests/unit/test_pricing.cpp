// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/bounds.hpp"
#include "liqhedge/pricing.hpp"
#include "liqhedge/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace liqhedge;

namespace {

const double kT = 0.19, kLend = 0.0043, kBorrow = 0.03, kSpot = 2056.32;

QuoteBook small_book() {
    SyntheticMarket m;
    m.first_strike = 1900;
    m.strike_step = 50;
    m.strike_count = 7;
    return synthetic_book(m);
}

QuoteBook cash_only() {
    auto [c, q] = make_cash({kBorrow, kLend});
    return QuoteBook({c}, {q}, kSpot, kT);
}

ScenarioGrid small_grid() { return build_grid(reference_view(), {20, 8, 1e-6}); }

}  // namespace

TEST(Pricing, ZeroClaimIsFree) {
    const IndifferencePricer p(small_book(), small_grid(), Preferences::baseline(1e5, 2));
    const auto r = p.price(ClaimSpec::zero());
    EXPECT_NEAR(r.sell_price, 0.0, r.price_tol);
    EXPECT_NEAR(r.buy_price, 0.0, r.price_tol);
}

TEST(Pricing, CashOnlyConstantIsDiscountedAtLendRate) {
    const IndifferencePricer p(cash_only(), small_grid(), Preferences::baseline(1e5, 2));
    for (double c : {1e3, 1e4}) {
        const auto r = p.price(ClaimSpec::constant(c));
        EXPECT_NEAR(r.sell_price, c * std::exp(-kLend * kT), r.price_tol);
        EXPECT_NEAR(r.buy_price, c * std::exp(-kLend * kT), r.price_tol);
    }
}

TEST(Pricing, BuyIsNegatedSellOfNegatedClaim) {
    const IndifferencePricer p(small_book(), small_grid(), Preferences::baseline(1e5, 2));
    const auto c = ClaimSpec::digital(2050, 1000);
    PricingOptions o;
    o.price_tol = 0.01;
    EXPECT_DOUBLE_EQ(p.buy(c, o).price, -p.sell(c.negated(), o).price);
}

TEST(Pricing, OrderedBetweenHedgingBounds) {
    const auto book = small_book();
    const auto grid = small_grid();
    const IndifferencePricer p(book, grid, Preferences::baseline(1e5, 2));
    HedgeOptions ho;
    ho.interval = covering(grid);
    for (const auto& c : {ClaimSpec::digital(2050, 1000), ClaimSpec::quadratic_forward(2050)}) {
        const auto r = p.price(c);
        const double sup = superhedge(book, c, ho).cost, inf = subhedge(book, c, ho).cost;
        EXPECT_LE(inf, r.buy_price + 2 * r.price_tol) << c.kind_name();
        EXPECT_LE(r.buy_price, r.sell_price + 2 * r.price_tol) << c.kind_name();
        EXPECT_LE(r.sell_price, sup + 2 * r.price_tol) << c.kind_name();
        EXPECT_LE(r.bracket[1] - r.bracket[0], r.price_tol);
    }
}

TEST(Pricing, QuotedCallIsPricedWithinItsQuotes) {
    const auto book = small_book();
    const auto j = *book.find("C2050");
    const IndifferencePricer p(book, small_grid(), Preferences::baseline(1e5, 2));
    const auto r = p.price(ClaimSpec::call(2050));
    EXPECT_LE(r.sell_price, book.quotes()[j].ask_price + 2 * r.price_tol);
    EXPECT_GE(r.buy_price, book.quotes()[j].bid_price - 2 * r.price_tol);
    EXPECT_LE(r.buy_price, r.sell_price + 2 * r.price_tol);
    EXPECT_FALSE(r.excluded_instrument);
}

TEST(Pricing, ExclusionRemovesTheQuotedInstrument) {
    const IndifferencePricer p(small_book(), small_grid(), Preferences::baseline(1e5, 2));
    PricingOptions o;
    o.exclude_from_hedging = true;
    const auto r = p.price(ClaimSpec::call(2050), o);
    ASSERT_TRUE(r.excluded_instrument);
    EXPECT_EQ(*r.excluded_instrument, "C2050");
    EXPECT_EQ(std::count(r.instrument_ids.begin(), r.instrument_ids.end(), "C2050"), 0);
    EXPECT_EQ(r.hedge_sell.size(), small_book().size() - 1);
}

TEST(Pricing, BaselineLiabilityShiftsPrices) {
    const auto book = small_book();
    const auto grid = small_grid();
    const auto prefs = Preferences::baseline(1e5, 2);
    const auto c = ClaimSpec::digital(2050, 1000);
    const IndifferencePricer flat(book, grid, prefs);
    const IndifferencePricer short_pos(book, grid, prefs, Liability().plus(c, 20.0));
    // already short the claim: selling more costs more
    EXPECT_GE(short_pos.price(c).sell_price + 2 * flat.price_tolerance(c, {}), flat.price(c).sell_price);
}

TEST(Replication, QuotedCallIsOneCall) {
    const auto book = small_book();
    const auto r = bl_replication(book, ClaimSpec::call(2050));
    const auto j = *book.find("C2050");
    EXPECT_NEAR(r.cost, book.quotes()[j].ask_price, 1e-9);
    for (std::size_t i = 0; i < r.strikes.size(); ++i) EXPECT_NEAR(r.weights[i], r.strikes[i] == 2050 ? 1.0 : 0.0, 1e-12);
    EXPECT_NEAR(r.payoff(2300), 250.0, 1e-9);
}

TEST(Replication, KinksOnStrikesAreReplicatedExactly) {
    const auto book = small_book();
    const auto c = ClaimSpec::piecewise_linear({2000, 2050, 2100}, {10, 10, 60});
    const auto r = bl_replication(book, c);
    for (double x : {1500.0, 2000.0, 2025.0, 2075.0, 2400.0}) EXPECT_NEAR(r.payoff(x), c(x), 1e-9);
}

TEST(Replication, QuadraticMassMatchesDerivativeIncrease) {
    const auto book = small_book();
    const auto r = bl_replication(book, ClaimSpec::quadratic_forward(2050));
    EXPECT_DOUBLE_EQ(r.anchor, 0.0);
    EXPECT_NEAR(std::accumulate(r.weights.begin(), r.weights.end(), 0.0), 2.0 * 5000.0, 1e-9);
    // interior cells span one strike step
    EXPECT_NEAR(r.weights[1], 2 * 50.0, 1e-9);
    EXPECT_NEAR(r.bond_units, 2050.0 * 2050.0, 1e-6);
    EXPECT_NEAR(r.underlying_units, -2 * 2050.0, 1e-12);
}

TEST(Replication, LogForwardAnchorsAtIntervalLow) {
    const auto r = bl_replication(small_book(), ClaimSpec::log_forward(2050, 1e5));
    EXPECT_DOUBLE_EQ(r.anchor, 100.0);
    EXPECT_THROW((void)bl_replication(small_book(), ClaimSpec::digital(2050, 1)), UnsupportedClaim);
}
