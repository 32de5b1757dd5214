// SPDX-License-Identifier: Apache-2.0
#include "liqhedge/service/codec.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(LIQHEDGE_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string spx() { return std::string("--config ") + LIQHEDGE_DATA_DIR + "/spx_jun16.conf"; }

}  // namespace

TEST(Cli, OptimizeSpxJune2016) {
    const auto r = run(spx() + " --json optimize");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = liqhedge::service::json::parse(r.out);
    EXPECT_EQ(j["status"], "optimal");
    ASSERT_EQ(j["portfolio"].size(), 4u);
    EXPECT_EQ(j["portfolio"][1]["instrument"], "ESM6");
    for (const auto& row : j["portfolio"]) {
        const double n = row["net_units"];
        EXPECT_LE(row["short_units"].get<double>(), 1e9);
        EXPECT_TRUE(std::isfinite(n));
    }
    EXPECT_LT(j["kkt_residual"].get<double>(), 1e-6);
}

TEST(Cli, BoundsOfQuotedCallAreItsQuotes) {
    const auto r = run(spx() + R"( --json bounds --claim '{"kind":"call","strike":2095}')");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = liqhedge::service::json::parse(r.out);
    EXPECT_NEAR(j["superhedge"]["cost"].get<double>(), 28.20, 1e-8);
    EXPECT_NEAR(j["subhedge"]["cost"].get<double>(), 26.90, 1e-8);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run(spx() + R"( price --claim '{"kind":"swap"}')").code, 2);
    EXPECT_EQ(run("--config /nonexistent.conf optimize").code, 2);
    EXPECT_EQ(run(spx() + " --lambda -1 optimize").code, 2);
    EXPECT_EQ(run(spx() + " --nu 1.5 optimize").code, 2);
    EXPECT_EQ(run(spx() + R"( sweep --spec '{"parameter":"lambda","values":[2,1]}')").code, 2);
}

TEST(Cli, SweepWritesCsv) {
    const auto path = std::filesystem::temp_directory_path() / "liqhedge_cli_sweep.csv";
    const auto r = run(spx() + R"( --panels 20 --nodes 8 sweep --spec '{"parameter":"lambda","values":[1,2]}' --out )" +
                       path.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "lambda,sell_price,buy_price,entropic_risk,status");
    std::filesystem::remove(path);
}

TEST(Cli, FixtureCommandWritesLoadableBook) {
    const auto dir = std::filesystem::temp_directory_path() / "liqhedge_fixture_test";
    std::filesystem::create_directories(dir);
    const auto quotes = dir / "quotes.csv";
    ASSERT_EQ(run("fixture --out " + quotes.string()).code, 0);
    const auto conf = dir / "session.conf";
    std::ofstream(conf) << "quotes = quotes.csv\nspot = 2056.32\nmaturity_years = 0.19\nlend_rate = 0.0043\nborrow_rate = 0.03\n";
    const auto r = run("--config " + conf.string() + " --panels 10 --nodes 4 --json optimize");
    EXPECT_EQ(r.code, 0);
    std::filesystem::remove_all(dir);
}
