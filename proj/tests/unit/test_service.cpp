// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/service/codec.hpp"
#include "liqhedge/service/engine.hpp"
#include "liqhedge/service/http.hpp"
#include "liqhedge/synthetic.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace liqhedge;
using namespace liqhedge::service;

namespace {

SessionConfig small_config() {
    SessionConfig c;
    c.market.spot = 2056.32;
    c.market.maturity_years = 0.19;
    c.market.lend_rate = 0.0043;
    c.market.borrow_rate = 0.03;
    c.view = reference_view();
    c.grid = {20, 8, 1e-6};
    return c;
}

QuoteBook small_book() {
    SyntheticMarket m;
    m.first_strike = 1900;
    m.strike_step = 50;
    m.strike_count = 7;
    return synthetic_book(m);
}

Engine small_engine() { return Engine(small_book(), small_config()); }

}  // namespace

TEST(Codec, ClaimRoundTrip) {
    const ClaimSpec cs[] = {ClaimSpec::call(2050),
                            ClaimSpec::put(1900),
                            ClaimSpec::digital(2050, 1e4),
                            ClaimSpec::quadratic_forward(2050),
                            ClaimSpec::log_forward(2050, 1e5),
                            ClaimSpec::piecewise_linear({1, 2, 3}, {0, 1, 0}),
                            ClaimSpec::constant(5),
                            ClaimSpec::scaled(-2, ClaimSpec::call(2000))};
    for (const auto& c : cs) {
        const json j = claim_to_json(c);
        const ClaimSpec back = claim_from_json(j);
        EXPECT_EQ(claim_to_json(back), j);
        for (double x : {1500.0, 2050.0, 2600.0}) EXPECT_DOUBLE_EQ(back(x), c(x));
    }
}

TEST(Codec, FieldLevelErrors) {
    auto message = [](const json& j) -> std::string {
        try {
            (void)claim_from_json(j);
        } catch (const ValidationError& e) {
            return e.what();
        }
        return "";
    };
    EXPECT_NE(message({{"kind", "swap"}}).find("claim.kind"), std::string::npos);
    EXPECT_NE(message({{"kind", "call"}}).find("claim.strike"), std::string::npos);
    EXPECT_NE(message({{"kind", "call"}, {"strike", "abc"}}).find("claim.strike"), std::string::npos);
    EXPECT_NE(message({{"kind", "scaled"}, {"multiplier", 2}, {"claim", {{"kind", "put"}}}}).find("claim.claim.strike"),
              std::string::npos);
    EXPECT_THROW((void)liability_from_json(json{{"claim", 1}}), ValidationError);
}

TEST(Codec, ViewAcceptsInfiniteNu) {
    const auto v = view_from_json({{"nu", "inf"}}, reference_view());
    EXPECT_TRUE(v.gaussian());
    EXPECT_EQ(view_to_json(v)["nu"], "inf");
    EXPECT_THROW((void)view_from_json({{"sigma", -1}}, reference_view()), ValidationError);
}

TEST(Codec, PortfolioRows) {
    const auto book = small_book();
    auto p = SplitPortfolio::zeros(book.size());
    p.short_units[*book.find("C2050")] = 3.0;
    const json j = portfolio_to_json(book, p);
    const auto& row = j.at(*book.find("C2050"));
    EXPECT_EQ(row["instrument"], "C2050");
    EXPECT_EQ(row["side"], "short");
    EXPECT_DOUBLE_EQ(row["net_units"].get<double>(), -3.0);
    EXPECT_EQ(j.at(0)["side"], "flat");
    const auto back = portfolio_from_json(book, {{"C2050", -3.0}});
    EXPECT_DOUBLE_EQ(back.net(*book.find("C2050")), -3.0);
    EXPECT_THROW((void)portfolio_from_json(book, {{"C2050", -1e9}}), ValidationError);
    EXPECT_THROW((void)portfolio_from_json(book, {{"NOPE", 1}}), ValidationError);
}

TEST(Engine, StatusCodes) {
    const Engine e = small_engine();
    EXPECT_EQ(e.handle("GET", "/market", "").status, 200);
    EXPECT_EQ(e.handle("GET", "/solve", "").status, 405);
    EXPECT_EQ(e.handle("POST", "/nope", "{}").status, 404);
    EXPECT_EQ(e.handle("POST", "/solve", "{not json").status, 400);
    EXPECT_EQ(e.handle("POST", "/solve", "[1]").status, 400);
    EXPECT_EQ(e.handle("POST", "/solve", R"({"lambda": -1})").status, 400);
    EXPECT_EQ(e.handle("POST", "/price", R"({"claim": {"kind": "swap"}})").status, 400);
    EXPECT_EQ(e.handle("POST", "/price", R"({"claim": {"kind": "call", "strike": 2050}, "max_expansions": 0,
                                           "interval": {"lo": 2000, "hi": 2001}})")
                  .status,
              422);
    const auto bad = e.handle("POST", "/price", "{}");
    EXPECT_EQ(bad.status, 400);
    EXPECT_EQ(bad.body["error"]["type"], "validation_error");
}

TEST(Engine, MarketSummary) {
    const Engine e = small_engine();
    const json m = e.market();
    EXPECT_EQ(m["instrument_count"], small_book().size());
    // 7 calls, 7 puts at 1% and the forward at 0.25 over its mid delivery price
    EXPECT_EQ(m["spread_statistics"]["quoted_instruments"], 15);
    const auto& f = std::get<Forward>(small_book().instruments()[*small_book().find("FWD")].kind);
    const double fwd_rel = (f.ask - f.bid) / (0.5 * (f.ask + f.bid));
    EXPECT_NEAR(m["spread_statistics"]["mean_relative"].get<double>(), (14 * 0.01 + fwd_rel) / 15.0, 1e-12);
    EXPECT_TRUE(m["instruments"][0]["ask_depth"].is_null());
}

TEST(Engine, SolveBoundsAndPriceAreConsistent) {
    const Engine e = small_engine();
    const auto s = e.handle("POST", "/solve", "{}");
    ASSERT_EQ(s.status, 200) << s.body.dump();
    EXPECT_EQ(s.body["status"], "optimal");
    EXPECT_EQ(s.body["tolerances"]["grid"]["panels"], 20);

    const auto b = e.handle("POST", "/bounds", R"({"claim": {"kind": "digital", "strike": 2050, "amount": 1000}})");
    ASSERT_EQ(b.status, 200) << b.body.dump();
    const auto p = e.handle("POST", "/price", R"({"claim": {"kind": "digital", "strike": 2050, "amount": 1000}})");
    ASSERT_EQ(p.status, 200) << p.body.dump();
    const double tol = p.body["tolerances"]["price_tol"];
    EXPECT_LE(b.body["subhedge"]["cost"].get<double>(), p.body["buy_price"].get<double>() + 2 * tol);
    EXPECT_LE(p.body["buy_price"].get<double>(), p.body["sell_price"].get<double>() + 2 * tol);
    EXPECT_LE(p.body["sell_price"].get<double>(), b.body["superhedge"]["cost"].get<double>() + 2 * tol);
}

TEST(Engine, SweepAndDistribution) {
    const Engine e = small_engine();
    const auto s = e.handle("POST", "/sweep", R"({"parameter": "lambda", "values": [1, 2]})");
    ASSERT_EQ(s.status, 200) << s.body.dump();
    EXPECT_EQ(s.body["rows"].size(), 2u);
    EXPECT_EQ(s.body["csv"].get<std::string>().substr(0, 7), "lambda,");
    EXPECT_EQ(e.handle("POST", "/sweep", R"({"parameter": "lambda", "values": [2, 1]})").status, 400);

    const auto d = e.handle("POST", "/distribution", R"({"n": 10000, "seed": 3, "bins": 10})");
    ASSERT_EQ(d.status, 200) << d.body.dump();
    EXPECT_EQ(d.body["counts"].size(), 10u);
    EXPECT_FALSE(d.body.contains("samples"));
    const auto d2 = e.handle("POST", "/distribution", R"({"n": 10000, "seed": 3, "bins": 10, "portfolio": {"C2050": 5}})");
    ASSERT_EQ(d2.status, 200) << d2.body.dump();
}

TEST(Engine, CacheReturnsIdenticalBodies) {
    const Engine e = small_engine();
    const auto a = e.handle("POST", "/solve", R"({"lambda": 3})");
    const auto hits = e.cache().hits();
    const auto b = e.handle("POST", "/solve", R"({"lambda": 3})");
    EXPECT_EQ(e.cache().hits(), hits + 1);
    EXPECT_EQ(a.body, b.body);

    ResultCache small(2);
    small.put("a", 1);
    small.put("b", 2);
    small.put("c", 3);
    EXPECT_EQ(small.size(), 2u);
    EXPECT_FALSE(small.get("a"));
    EXPECT_EQ(*small.get("c"), 3);
}

TEST(Engine, ConcurrentRequestsMatchSerial) {
    std::vector<std::string> bodies;
    for (int i = 0; i < 32; ++i) bodies.push_back(R"({"lambda": )" + std::to_string(1 + i % 8) + "}");
    const Engine serial = small_engine();
    std::vector<json> expected;
    for (const auto& b : bodies) expected.push_back(serial.handle("POST", "/solve", b).body);

    const Engine shared = small_engine();
    std::vector<Response> got(bodies.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < bodies.size(); ++i)
            pool.emplace_back([&, i] { got[i] = shared.handle("POST", "/solve", bodies[i]); });
    }
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        EXPECT_EQ(got[i].status, 200);
        EXPECT_EQ(got[i].body, expected[i]) << i;
    }
}

TEST(Http, EndpointsOverLoopback) {
    const Engine e = small_engine();
    httplib::Server server;
    register_routes(server, e);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto m = client.Get("/market");
    ASSERT_TRUE(m);
    EXPECT_EQ(m->status, 200);
    EXPECT_EQ(json::parse(m->body)["instrument_count"], small_book().size());
    auto bad = client.Post("/price", R"({"claim": {"kind": "swap"}})", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto ok = client.Post("/bounds", R"({"claim": {"kind": "call", "strike": 2050}})", "application/json");
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->status, 200);
    EXPECT_EQ(json::parse(ok->body), e.handle("POST", "/bounds", R"({"claim": {"kind": "call", "strike": 2050}})").body);

    server.stop();
    t.join();
}

TEST(Http, ParseBind) {
    EXPECT_EQ(parse_bind("127.0.0.1:9000"), (std::pair<std::string, int>{"127.0.0.1", 9000}));
    EXPECT_EQ(parse_bind("8080").second, 8080);
    EXPECT_THROW((void)parse_bind("host:abc"), ValidationError);
}
