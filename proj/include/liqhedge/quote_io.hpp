// SPDX-License-Identifier: Apache-2.0
//
// Quote book ingestion.
//
// CSV layout (header required):
//   ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots
// type is forward, call or put. For the forward row the bid/ask columns hold
// the forward prices K^b/K^a and strike is empty. Quantities are in lots and
// are converted to units on load. Cash is synthesized from the market config.
#pragma once

#include "liqhedge/error.hpp"
#include "liqhedge/format.hpp"
#include "liqhedge/instruments.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace liqhedge {

struct MarketConfig {
    double spot = 0.0;
    double maturity_years = 0.0;
    double lend_rate = 0.0;
    double borrow_rate = 0.0;
    double lot_forward = 50.0;
    double lot_option = 100.0;

    [[nodiscard]] RatePair rates() const { return {borrow_rate, lend_rate}; }

    void validate() const {
        if (!(spot > 0.0)) throw ValidationError("spot must be positive");
        if (!(maturity_years > 0.0)) throw ValidationError("maturity_years must be positive");
        if (!(lot_forward > 0.0) || !(lot_option > 0.0)) throw ValidationError("lot sizes must be positive");
        liqhedge::validate(rates());
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline double parse_number(std::string_view s, std::size_t line, const char* field) {
    s = trim(s);
    if (s.empty()) throw ParseError(std::string("empty ") + field, line);
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("bad number for ") + field + ": '" + std::string(s) + "'", line);
    return v;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

inline QuoteBook parse_quote_book(std::istream& in, const MarketConfig& cfg) {
    cfg.validate();
    std::vector<Instrument> instruments;
    std::vector<Quote> quotes;
    auto [cash, cash_quote] = make_cash(cfg.rates());
    instruments.push_back(cash);
    quotes.push_back(cash_quote);

    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto cols = detail::split(body, ',');
        if (!header_seen) {
            static const char* expected[] = {"ticker", "type", "strike", "bid_qty_lots", "bid", "ask", "ask_qty_lots"};
            if (cols.size() != 7) throw ParseError("header must have 7 columns", lineno);
            for (std::size_t i = 0; i < 7; ++i)
                if (detail::lower(cols[i]) != expected[i])
                    throw ParseError("unexpected header column '" + std::string(cols[i]) + "'", lineno);
            header_seen = true;
            continue;
        }
        if (cols.size() != 7) throw ParseError("expected 7 columns, got " + std::to_string(cols.size()), lineno);
        std::string ticker(cols[0]);
        if (ticker.empty()) throw ParseError("empty ticker", lineno);
        const auto type = detail::lower(cols[1]);
        const double bid_lots = detail::parse_number(cols[3], lineno, "bid_qty_lots");
        const double bid = detail::parse_number(cols[4], lineno, "bid");
        const double ask = detail::parse_number(cols[5], lineno, "ask");
        const double ask_lots = detail::parse_number(cols[6], lineno, "ask_qty_lots");
        if (bid_lots < 0.0 || ask_lots < 0.0) throw ParseError("negative quantity", lineno);
        if (bid > ask)
            throw ValidationError("line " + std::to_string(lineno) + ": crossed quote for " + ticker + " (bid " +
                                  std::string(cols[4]) + " > ask " + std::string(cols[5]) + ")");

        Instrument instr;
        Quote q;
        q.instrument_id = ticker;
        instr.id = ticker;
        if (type == "forward") {
            if (!cols[2].empty()) throw ParseError("forward row must leave strike empty", lineno);
            instr.kind = Forward{ask, bid};
            q.bid_depth = bid_lots * cfg.lot_forward;
            q.ask_depth = ask_lots * cfg.lot_forward;
        } else if (type == "call" || type == "put") {
            const double k = detail::parse_number(cols[2], lineno, "strike");
            if (!(k > 0.0)) throw ParseError("strike must be positive", lineno);
            if (type == "call") instr.kind = Call{k};
            else instr.kind = Put{k};
            q.bid_price = bid;
            q.ask_price = ask;
            q.bid_depth = bid_lots * cfg.lot_option;
            q.ask_depth = ask_lots * cfg.lot_option;
        } else {
            throw ParseError("unknown instrument type '" + std::string(cols[1]) + "'", lineno);
        }
        instruments.push_back(std::move(instr));
        quotes.push_back(std::move(q));
    }
    if (!header_seen) throw ParseError("missing header row", 0);
    try {
        return QuoteBook(std::move(instruments), std::move(quotes), cfg.spot, cfg.maturity_years);
    } catch (const ParseError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("invalid quote book: ") + e.what());
    }
}

inline QuoteBook load_quote_book(const std::string& path, const MarketConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open quote file " + path);
    return parse_quote_book(in, cfg);
}

/// Writes the non-cash instruments back in the CSV layout, depths in lots.
inline void write_quote_book(std::ostream& out, const QuoteBook& book, const MarketConfig& cfg) {
    out << "ticker,type,strike,bid_qty_lots,bid,ask,ask_qty_lots\n";
    for (std::size_t j = 0; j < book.size(); ++j) {
        const auto& in = book.instruments()[j];
        const auto& q = book.quotes()[j];
        if (in.is_cash()) continue;
        if (const auto* f = std::get_if<Forward>(&in.kind)) {
            out << in.id << ",forward,," << shortest(q.bid_depth / cfg.lot_forward) << ',' << shortest(f->bid) << ','
                << shortest(f->ask) << ',' << shortest(q.ask_depth / cfg.lot_forward) << '\n';
        } else {
            out << in.id << ',' << (std::holds_alternative<Call>(in.kind) ? "call" : "put") << ','
                << shortest(*in.strike()) << ',' << shortest(q.bid_depth / cfg.lot_option) << ','
                << shortest(q.bid_price) << ',' << shortest(q.ask_price) << ','
                << shortest(q.ask_depth / cfg.lot_option) << '\n';
        }
    }
}

/// Key-value config: one `key = value` per line, `#` comments.
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto body = detail::trim(line);
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = detail::trim(body.substr(0, hash));
        if (body.empty()) continue;
        auto eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
        auto key = detail::trim(body.substr(0, eq));
        auto value = detail::trim(body.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        kv[std::string(key)] = std::string(value);
    }
    return kv;
}

inline MarketConfig market_config_from(const std::map<std::string, std::string>& kv, MarketConfig cfg = {}) {
    auto num = [&](const char* key, double& dst) {
        if (auto it = kv.find(key); it != kv.end()) dst = detail::parse_number(it->second, 0, key);
    };
    num("spot", cfg.spot);
    num("maturity_years", cfg.maturity_years);
    num("lend_rate", cfg.lend_rate);
    num("borrow_rate", cfg.borrow_rate);
    num("lot_forward", cfg.lot_forward);
    num("lot_option", cfg.lot_option);
    return cfg;
}

}  // namespace liqhedge
