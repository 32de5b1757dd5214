// SPDX-License-Identifier: Apache-2.0
//
// Tradable assets on a single underlying with a common maturity: cash,
// a forward, European calls and puts. Each carries a best bid/ask quote
// with finite depth. Depths are stored in units of the asset.
#pragma once

#include "liqhedge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace liqhedge {

/// Depth sentinel for a side without a quantity limit.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct RatePair {
    double borrow_rate = 0.0;  // r^a
    double lend_rate = 0.0;    // r^b
};

struct Cash {
    RatePair rates;
};

struct Forward {
    double ask = 0.0;  // K^a, forward price for a long position
    double bid = 0.0;  // K^b, forward price for a short position
};

struct Call {
    double strike = 0.0;
};

struct Put {
    double strike = 0.0;
};

using InstrumentKind = std::variant<Cash, Forward, Call, Put>;

struct Instrument {
    std::string id;
    InstrumentKind kind;

    [[nodiscard]] bool is_cash() const { return std::holds_alternative<Cash>(kind); }
    [[nodiscard]] bool is_forward() const { return std::holds_alternative<Forward>(kind); }
    [[nodiscard]] bool is_option() const {
        return std::holds_alternative<Call>(kind) || std::holds_alternative<Put>(kind);
    }
    /// Strike of a call/put, nullopt otherwise.
    [[nodiscard]] std::optional<double> strike() const {
        if (auto* c = std::get_if<Call>(&kind)) return c->strike;
        if (auto* p = std::get_if<Put>(&kind)) return p->strike;
        return std::nullopt;
    }
};

struct Quote {
    std::string instrument_id;
    double bid_price = 0.0;  // s_b
    double ask_price = 0.0;  // s_a
    double bid_depth = 0.0;  // max units sellable
    double ask_depth = 0.0;  // max units buyable

    [[nodiscard]] double mid() const { return 0.5 * (bid_price + ask_price); }
    [[nodiscard]] double spread() const { return ask_price - bid_price; }
};

inline void validate(const RatePair& r) {
    if (!std::isfinite(r.borrow_rate) || !std::isfinite(r.lend_rate))
        throw ValidationError("rates must be finite");
    if (r.borrow_rate < r.lend_rate)
        throw ValidationError("borrow rate must be >= lend rate");
}

inline void validate(const Instrument& instr) {
    if (instr.id.empty()) throw ValidationError("instrument id must be nonempty");
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Cash>) {
                validate(k.rates);
            } else if constexpr (std::is_same_v<K, Forward>) {
                if (!(k.ask >= k.bid) || !std::isfinite(k.ask) || !std::isfinite(k.bid))
                    throw ValidationError(instr.id + ": forward ask must be >= forward bid");
            } else {
                if (!(k.strike > 0.0) || !std::isfinite(k.strike))
                    throw ValidationError(instr.id + ": strike must be positive");
            }
        },
        instr.kind);
}

inline void validate(const Quote& q) {
    if (!std::isfinite(q.bid_price) || !std::isfinite(q.ask_price))
        throw ValidationError(q.instrument_id + ": prices must be finite");
    if (q.bid_price > q.ask_price)
        throw ValidationError(q.instrument_id + ": crossed quote (bid " + std::to_string(q.bid_price) +
                              " > ask " + std::to_string(q.ask_price) + ")");
    if (!(q.bid_depth >= 0.0) || !(q.ask_depth >= 0.0))
        throw ValidationError(q.instrument_id + ": depths must be nonnegative");
}

namespace detail {
inline void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(what) + " must be positive and finite");
}
}  // namespace detail

/// Payoff at maturity of one unit held long.
inline double payoff_unit_long(const Instrument& instr, double x_T, double T) {
    detail::require_positive(x_T, "underlying level");
    detail::require_positive(T, "maturity");
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Cash>) return std::exp(k.rates.lend_rate * T);
            else if constexpr (std::is_same_v<K, Forward>) return x_T - k.ask;
            else if constexpr (std::is_same_v<K, Call>) return std::max(x_T - k.strike, 0.0);
            else return std::max(k.strike - x_T, 0.0);
        },
        instr.kind);
}

/// Payoff coefficient multiplying a nonnegative short quantity.
inline double payoff_unit_short(const Instrument& instr, double x_T, double T) {
    detail::require_positive(x_T, "underlying level");
    detail::require_positive(T, "maturity");
    return std::visit(
        [&](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, Cash>) return -std::exp(k.rates.borrow_rate * T);
            else if constexpr (std::is_same_v<K, Forward>) return -(x_T - k.bid);
            else if constexpr (std::is_same_v<K, Call>) return -std::max(x_T - k.strike, 0.0);
            else return -std::max(k.strike - x_T, 0.0);
        },
        instr.kind);
}

/// Payoff of a signed position x (concave, the minimum of the long and short lines).
inline double payoff(const Instrument& instr, double x, double x_T, double T) {
    return x >= 0.0 ? payoff_unit_long(instr, x_T, T) * x : -payoff_unit_short(instr, x_T, T) * x;
}

/// Cost of entering a signed position: ask for buys, bid for sells.
inline double entry_cost(const Quote& quote, double x) {
    if (x > quote.ask_depth || -x > quote.bid_depth)
        throw DepthViolation(quote.instrument_id + ": position " + std::to_string(x) + " outside [" +
                             std::to_string(-quote.bid_depth) + ", " + std::to_string(quote.ask_depth) + "]");
    return x >= 0.0 ? quote.ask_price * x : quote.bid_price * x;
}

/// Immutable snapshot of every tradable instrument with its best quote.
class QuoteBook {
public:
    QuoteBook(std::vector<Instrument> instruments, std::vector<Quote> quotes, double spot, double maturity)
        : instruments_(std::move(instruments)), quotes_(std::move(quotes)), spot_(spot), maturity_(maturity) {
        if (!(spot_ > 0.0) || !std::isfinite(spot_)) throw ValidationError("spot must be positive");
        if (!(maturity_ > 0.0) || !std::isfinite(maturity_)) throw ValidationError("maturity must be positive");
        if (instruments_.size() != quotes_.size())
            throw ValidationError("one quote per instrument required");
        std::unordered_set<std::string> seen;
        std::size_t n_cash = 0, n_fwd = 0;
        for (std::size_t j = 0; j < instruments_.size(); ++j) {
            const auto& in = instruments_[j];
            validate(in);
            if (!seen.insert(in.id).second) throw ValidationError("duplicate instrument id " + in.id);
            if (quotes_[j].instrument_id != in.id)
                throw ValidationError("quote " + quotes_[j].instrument_id + " does not match instrument " + in.id);
            validate(quotes_[j]);
            if (in.is_cash()) {
                ++n_cash;
                cash_index_ = j;
                const auto& q = quotes_[j];
                if (q.bid_price != 1.0 || q.ask_price != 1.0)
                    throw ValidationError("cash quote must be 1/1");
            }
            if (in.is_forward()) {
                ++n_fwd;
                if (quotes_[j].bid_price != 0.0 || quotes_[j].ask_price != 0.0)
                    throw ValidationError("forward quote prices must be 0 (cost of entry is zero)");
            }
        }
        if (n_cash != 1) throw ValidationError("quote book needs exactly one cash instrument");
        if (n_fwd > 1) throw ValidationError("quote book allows at most one forward");
    }

    [[nodiscard]] const std::vector<Instrument>& instruments() const { return instruments_; }
    [[nodiscard]] const std::vector<Quote>& quotes() const { return quotes_; }
    [[nodiscard]] std::size_t size() const { return instruments_.size(); }
    [[nodiscard]] double spot() const { return spot_; }
    [[nodiscard]] double maturity() const { return maturity_; }
    [[nodiscard]] std::size_t cash_index() const { return cash_index_; }
    [[nodiscard]] const Cash& cash() const { return std::get<Cash>(instruments_[cash_index_].kind); }

    [[nodiscard]] std::optional<std::size_t> find(const std::string& id) const {
        for (std::size_t j = 0; j < instruments_.size(); ++j)
            if (instruments_[j].id == id) return j;
        return std::nullopt;
    }

    /// Sorted distinct option strikes.
    [[nodiscard]] std::vector<double> strikes() const {
        std::vector<double> ks;
        for (const auto& in : instruments_)
            if (auto k = in.strike()) ks.push_back(*k);
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        return ks;
    }

private:
    std::vector<Instrument> instruments_;
    std::vector<Quote> quotes_;
    double spot_;
    double maturity_;
    std::size_t cash_index_ = 0;
};

/// Cash with unit price and unbounded depth on both sides.
inline std::pair<Instrument, Quote> make_cash(const RatePair& rates, std::string id = "CASH") {
    return {Instrument{id, Cash{rates}}, Quote{id, 1.0, 1.0, kUnbounded, kUnbounded}};
}

// Book transforms. Each returns a new book; the input is never modified.

/// Book with one instrument removed (cash cannot be removed).
inline QuoteBook without_instrument(const QuoteBook& book, const std::string& id) {
    std::vector<Instrument> ins;
    std::vector<Quote> qs;
    for (std::size_t j = 0; j < book.size(); ++j) {
        if (book.instruments()[j].id == id) {
            if (book.instruments()[j].is_cash()) throw ValidationError("cannot remove cash");
            continue;
        }
        ins.push_back(book.instruments()[j]);
        qs.push_back(book.quotes()[j]);
    }
    return QuoteBook(std::move(ins), std::move(qs), book.spot(), book.maturity());
}

/// Multiplies every finite depth by `factor`; factor = inf removes all limits.
inline QuoteBook with_scaled_depths(const QuoteBook& book, double factor) {
    if (!(factor >= 0.0)) throw ValidationError("depth factor must be nonnegative");
    auto qs = book.quotes();
    for (auto& q : qs) {
        auto scale = [&](double d) { return std::isinf(d) ? d : (std::isinf(factor) ? (d > 0 ? factor : 0.0) : d * factor); };
        q.bid_depth = scale(q.bid_depth);
        q.ask_depth = scale(q.ask_depth);
    }
    return QuoteBook(book.instruments(), std::move(qs), book.spot(), book.maturity());
}

/// Collapses every option quote to its mid, and the forward to its mid price.
inline QuoteBook with_mid_prices(const QuoteBook& book) {
    auto ins = book.instruments();
    auto qs = book.quotes();
    for (std::size_t j = 0; j < ins.size(); ++j) {
        if (auto* f = std::get_if<Forward>(&ins[j].kind)) {
            const double m = 0.5 * (f->ask + f->bid);
            f->ask = f->bid = m;
        } else if (ins[j].is_option()) {
            const double m = qs[j].mid();
            qs[j].bid_price = qs[j].ask_price = m;
        }
    }
    return QuoteBook(std::move(ins), std::move(qs), book.spot(), book.maturity());
}

}  // namespace liqhedge
