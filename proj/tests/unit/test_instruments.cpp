// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/instruments.hpp"
#include "liqhedge/quote_io.hpp"
#include "liqhedge/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace liqhedge;

namespace {

MarketConfig spx_market() {
    MarketConfig m;
    m.spot = 2056.32;
    m.maturity_years = 0.19;
    m.lend_rate = 0.0043;
    m.borrow_rate = 0.03;
    return m;
}

const char* kSpxJune2016 =
    "# S&P 500 June 2016\n"
    "ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n"
    "ESM6,forward,,258,2048.75,2049,377\n"
    "C2095,call,2095,623,26.90,28.20,506\n"
    "P2095,put,2095,27,72.60,74.70,22\n";

}  // namespace

TEST(Payoff, UnitLongAndShortLines) {
    const double T = 0.5;
    const Instrument cash{"CASH", Cash{{0.05, 0.01}}};
    EXPECT_DOUBLE_EQ(payoff_unit_long(cash, 100.0, T), std::exp(0.01 * T));
    EXPECT_DOUBLE_EQ(payoff_unit_short(cash, 100.0, T), -std::exp(0.05 * T));

    const Instrument fwd{"F", Forward{101.0, 99.0}};
    EXPECT_DOUBLE_EQ(payoff_unit_long(fwd, 110.0, T), 9.0);
    EXPECT_DOUBLE_EQ(payoff_unit_short(fwd, 110.0, T), -11.0);

    const Instrument call{"C", Call{100.0}};
    EXPECT_DOUBLE_EQ(payoff_unit_long(call, 90.0, T), 0.0);
    EXPECT_DOUBLE_EQ(payoff_unit_long(call, 130.0, T), 30.0);
    EXPECT_DOUBLE_EQ(payoff_unit_short(call, 130.0, T), -30.0);

    const Instrument put{"P", Put{100.0}};
    EXPECT_DOUBLE_EQ(payoff_unit_long(put, 90.0, T), 10.0);
    EXPECT_DOUBLE_EQ(payoff_unit_long(put, 130.0, T), 0.0);
}

TEST(Payoff, SignedPositionIsConcaveInQuantity) {
    const Instrument fwd{"F", Forward{101.0, 99.0}};
    for (double x : {-3.0, -1.0, 0.0, 2.0, 5.0})
        for (double y : {-4.0, 0.5, 3.0}) {
            const double mid = payoff(fwd, 0.5 * (x + y), 120.0, 1.0);
            EXPECT_GE(mid + 1e-12, 0.5 * (payoff(fwd, x, 120.0, 1.0) + payoff(fwd, y, 120.0, 1.0)));
        }
}

TEST(Payoff, RejectsNonPositiveLevels) {
    const Instrument call{"C", Call{100.0}};
    EXPECT_THROW((void)payoff_unit_long(call, 0.0, 1.0), DomainError);
    EXPECT_THROW((void)payoff_unit_long(call, 100.0, -1.0), DomainError);
}

TEST(EntryCost, AskForBuysBidForSellsAndDepthChecked) {
    const Quote q{"C", 2.0, 2.5, 10.0, 5.0};
    EXPECT_DOUBLE_EQ(entry_cost(q, 4.0), 10.0);
    EXPECT_DOUBLE_EQ(entry_cost(q, -4.0), -8.0);
    EXPECT_THROW((void)entry_cost(q, 5.5), DepthViolation);
    EXPECT_THROW((void)entry_cost(q, -10.5), DepthViolation);
}

TEST(QuoteBook, RejectsMalformedBooks) {
    auto [cash, cq] = make_cash({0.03, 0.01});
    EXPECT_THROW(QuoteBook({}, {}, 100.0, 1.0), ValidationError);
    EXPECT_THROW(QuoteBook({cash, cash}, {cq, cq}, 100.0, 1.0), ValidationError);
    EXPECT_THROW(QuoteBook({cash}, {cq}, -1.0, 1.0), ValidationError);
    EXPECT_THROW(QuoteBook({Instrument{"CASH", Cash{{0.01, 0.03}}}}, {cq}, 100.0, 1.0), ValidationError);
    Instrument c{"C", Call{100.0}};
    EXPECT_THROW(QuoteBook({cash, c}, {cq, Quote{"C", 3.0, 2.0, 1.0, 1.0}}, 100.0, 1.0), ValidationError);
    EXPECT_THROW(QuoteBook({cash, c}, {cq, Quote{"X", 2.0, 3.0, 1.0, 1.0}}, 100.0, 1.0), ValidationError);
    EXPECT_NO_THROW(QuoteBook({cash, c}, {cq, Quote{"C", 2.0, 3.0, 1.0, 1.0}}, 100.0, 1.0));
}

TEST(QuoteBook, Transforms) {
    const QuoteBook book = synthetic_book();
    EXPECT_EQ(book.size(), 2u + 82u);
    const QuoteBook less = without_instrument(book, "C2050");
    EXPECT_EQ(less.size(), book.size() - 1);
    EXPECT_FALSE(less.find("C2050"));
    EXPECT_THROW((void)without_instrument(book, "CASH"), ValidationError);

    const QuoteBook open = with_scaled_depths(book, kUnbounded);
    for (const auto& q : open.quotes()) EXPECT_TRUE(std::isinf(q.ask_depth) && std::isinf(q.bid_depth));
    const QuoteBook half = with_scaled_depths(book, 0.5);
    EXPECT_DOUBLE_EQ(half.quotes()[*half.find("C2050")].ask_depth, 5000.0);

    const QuoteBook mids = with_mid_prices(book);
    const auto j = *book.find("P1800");
    EXPECT_DOUBLE_EQ(mids.quotes()[j].bid_price, book.quotes()[j].mid());
    EXPECT_DOUBLE_EQ(mids.quotes()[j].ask_price, book.quotes()[j].mid());
    const auto& f = std::get<Forward>(mids.instruments()[*mids.find("FWD")].kind);
    EXPECT_DOUBLE_EQ(f.ask, f.bid);
}

TEST(Synthetic, MidsAreBlackScholesAndParityHolds) {
    const SyntheticMarket m;
    const QuoteBook book = synthetic_book(m);
    const double df = std::exp(-m.lend_rate * m.maturity);
    for (double k : {1600.0, 2050.0, 2500.0}) {
        const std::string tag = std::to_string(static_cast<int>(k));
        const double c = book.quotes()[*book.find("C" + tag)].mid();
        const double p = book.quotes()[*book.find("P" + tag)].mid();
        EXPECT_NEAR(c - p, m.spot - k * df, 1e-9 * m.spot);
        const auto& q = book.quotes()[*book.find("C" + tag)];
        EXPECT_NEAR(q.spread() / q.mid(), m.relative_spread, 1e-12);
    }
}

TEST(QuoteIo, ParsesSpxJune2016WithLotSizes) {
    std::istringstream in(kSpxJune2016);
    const QuoteBook book = parse_quote_book(in, spx_market());
    ASSERT_EQ(book.size(), 4u);
    EXPECT_TRUE(book.instruments()[book.cash_index()].is_cash());
    const auto f = *book.find("ESM6");
    EXPECT_DOUBLE_EQ(book.quotes()[f].bid_depth, 258 * 50.0);
    EXPECT_DOUBLE_EQ(book.quotes()[f].ask_depth, 377 * 50.0);
    EXPECT_DOUBLE_EQ(std::get<Forward>(book.instruments()[f].kind).bid, 2048.75);
    const auto c = *book.find("C2095");
    EXPECT_DOUBLE_EQ(book.quotes()[c].bid_price, 26.90);
    EXPECT_DOUBLE_EQ(book.quotes()[c].ask_depth, 506 * 100.0);
    const auto p = *book.find("P2095");
    EXPECT_DOUBLE_EQ(book.quotes()[p].bid_depth, 2700.0);
}

TEST(QuoteIo, RoundTrip) {
    std::istringstream in(kSpxJune2016);
    const auto cfg = spx_market();
    const QuoteBook book = parse_quote_book(in, cfg);
    std::ostringstream out;
    write_quote_book(out, book, cfg);
    std::istringstream back(out.str());
    const QuoteBook again = parse_quote_book(back, cfg);
    ASSERT_EQ(again.size(), book.size());
    for (std::size_t j = 0; j < book.size(); ++j) {
        EXPECT_EQ(again.quotes()[j].instrument_id, book.quotes()[j].instrument_id);
        EXPECT_DOUBLE_EQ(again.quotes()[j].bid_price, book.quotes()[j].bid_price);
        EXPECT_DOUBLE_EQ(again.quotes()[j].ask_depth, book.quotes()[j].ask_depth);
    }
}

TEST(QuoteIo, ReportsLineNumbers) {
    const std::string header = "ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n";
    auto line_of = [&](const std::string& body) -> std::size_t {
        std::istringstream in(header + body);
        try {
            (void)parse_quote_book(in, spx_market());
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("C1,call,100,1,x,2,1\n"), 2u);
    EXPECT_EQ(line_of("C1,call,100,1,1,2,1\nC2,swap,100,1,1,2,1\n"), 3u);
    EXPECT_EQ(line_of("C1,call,100,1,1,2\n"), 2u);
    EXPECT_EQ(line_of("C1,call,-5,1,1,2,1\n"), 2u);
    EXPECT_EQ(line_of("C1,call,100,-1,1,2,1\n"), 2u);

    std::istringstream crossed(header + "C1,call,100,1,3,2,1\n");
    EXPECT_THROW((void)parse_quote_book(crossed, spx_market()), ValidationError);
    std::istringstream dup(header + "C1,call,100,1,1,2,1\nC1,call,110,1,1,2,1\n");
    EXPECT_THROW((void)parse_quote_book(dup, spx_market()), ValidationError);
    std::istringstream noheader("C1,call,100,1,1,2,1\n");
    EXPECT_THROW((void)parse_quote_book(noheader, spx_market()), ParseError);
}

TEST(QuoteIo, KeyValueConfig) {
    std::istringstream in("# comment\nspot = 100\nmaturity_years=0.5 # trailing\n\nlend_rate = 0.01\nborrow_rate = 0.02\n");
    const auto kv = read_key_values(in);
    const auto m = market_config_from(kv);
    EXPECT_DOUBLE_EQ(m.spot, 100.0);
    EXPECT_DOUBLE_EQ(m.maturity_years, 0.5);
    EXPECT_DOUBLE_EQ(m.borrow_rate, 0.02);
    EXPECT_DOUBLE_EQ(m.lot_option, 100.0);
    std::istringstream bad("spot 100\n");
    EXPECT_THROW((void)read_key_values(bad), ParseError);
}

TEST(QuoteIo, BundledFilesLoad) {
    const QuoteBook t2 = load_quote_book(std::string(LIQHEDGE_DATA_DIR) + "/spx_jun16_quotes.csv", spx_market());
    EXPECT_EQ(t2.size(), 4u);
    const QuoteBook fx = load_quote_book(std::string(LIQHEDGE_DATA_DIR) + "/fixture_quotes.csv", spx_market());
    EXPECT_EQ(fx.size(), synthetic_book().size());
    EXPECT_THROW((void)load_quote_book("/nonexistent/quotes.csv", spx_market()), ValidationError);
}
