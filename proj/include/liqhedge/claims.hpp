// SPDX-License-Identifier: Apache-2.0
//
// European claims as functions of the underlying at maturity, and
// liabilities built from them.
#pragma once

#include "liqhedge/error.hpp"
#include "liqhedge/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace liqhedge {

class ClaimSpec;

namespace claim {

struct Call {
    double strike = 0.0;
};
struct Put {
    double strike = 0.0;
};
/// Pays `amount` when X_T >= strike.
struct Digital {
    double strike = 0.0;
    double amount = 0.0;
};
/// (X_T - strike)^2
struct QuadraticForward {
    double strike = 0.0;
};
/// scale * ln(strike / X_T)
struct LogForward {
    double strike = 0.0;
    double scale = 0.0;
};
/// Linear interpolation of a breakpoint table, extended linearly with the end slopes.
struct PiecewiseLinear {
    std::vector<double> breakpoints;
    std::vector<double> values;
};
struct Constant {
    double value = 0.0;
};
struct Scaled {
    double multiplier = 1.0;
    std::shared_ptr<const ClaimSpec> inner;
};

}  // namespace claim

class ClaimSpec {
public:
    using Kind = std::variant<claim::Call, claim::Put, claim::Digital, claim::QuadraticForward, claim::LogForward,
                              claim::PiecewiseLinear, claim::Constant, claim::Scaled>;

    ClaimSpec() : kind_(claim::Constant{0.0}) {}
    explicit ClaimSpec(Kind kind) : kind_(std::move(kind)) { validate(); }

    static ClaimSpec call(double k) { return ClaimSpec(claim::Call{k}); }
    static ClaimSpec put(double k) { return ClaimSpec(claim::Put{k}); }
    static ClaimSpec digital(double k, double amount) { return ClaimSpec(claim::Digital{k, amount}); }
    static ClaimSpec quadratic_forward(double k) { return ClaimSpec(claim::QuadraticForward{k}); }
    static ClaimSpec log_forward(double k, double scale) { return ClaimSpec(claim::LogForward{k, scale}); }
    static ClaimSpec piecewise_linear(std::vector<double> xs, std::vector<double> ys) {
        return ClaimSpec(claim::PiecewiseLinear{std::move(xs), std::move(ys)});
    }
    static ClaimSpec constant(double c) { return ClaimSpec(claim::Constant{c}); }
    static ClaimSpec zero() { return constant(0.0); }
    static ClaimSpec scaled(double m, ClaimSpec inner) {
        return ClaimSpec(claim::Scaled{m, std::make_shared<const ClaimSpec>(std::move(inner))});
    }

    [[nodiscard]] const Kind& kind() const { return kind_; }

    [[nodiscard]] ClaimSpec negated() const { return scaled(-1.0, *this); }

    [[nodiscard]] bool is_zero() const {
        if (auto* c = std::get_if<claim::Constant>(&kind_)) return c->value == 0.0;
        if (auto* s = std::get_if<claim::Scaled>(&kind_)) return s->multiplier == 0.0 || s->inner->is_zero();
        return false;
    }

    /// Payoff at X_T = x.
    [[nodiscard]] double operator()(double x) const {
        return std::visit(
            [x](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, claim::Call>) return std::max(x - k.strike, 0.0);
                else if constexpr (std::is_same_v<K, claim::Put>) return std::max(k.strike - x, 0.0);
                else if constexpr (std::is_same_v<K, claim::Digital>) return x >= k.strike ? k.amount : 0.0;
                else if constexpr (std::is_same_v<K, claim::QuadraticForward>) return (x - k.strike) * (x - k.strike);
                else if constexpr (std::is_same_v<K, claim::LogForward>) {
                    if (!(x > 0.0)) throw DomainError("log-forward is undefined at X_T <= 0");
                    return k.scale * std::log(k.strike / x);
                } else if constexpr (std::is_same_v<K, claim::PiecewiseLinear>) return eval_pwl(k, x);
                else if constexpr (std::is_same_v<K, claim::Constant>) return k.value;
                else return k.multiplier * (*k.inner)(x);
            },
            kind_);
    }

    /// Right derivative c'(x+). Jumps of a digital contribute nothing here.
    [[nodiscard]] double right_derivative(double x) const {
        return std::visit(
            [x](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, claim::Call>) return x >= k.strike ? 1.0 : 0.0;
                else if constexpr (std::is_same_v<K, claim::Put>) return x >= k.strike ? 0.0 : -1.0;
                else if constexpr (std::is_same_v<K, claim::Digital>) return 0.0;
                else if constexpr (std::is_same_v<K, claim::QuadraticForward>) return 2.0 * (x - k.strike);
                else if constexpr (std::is_same_v<K, claim::LogForward>) return -k.scale / x;
                else if constexpr (std::is_same_v<K, claim::PiecewiseLinear>) return slope_pwl(k, x);
                else if constexpr (std::is_same_v<K, claim::Constant>) return 0.0;
                else return k.multiplier * k.inner->right_derivative(x);
            },
            kind_);
    }

    /// Points where the payoff is not differentiable (kinks and jumps), ascending.
    [[nodiscard]] std::vector<double> kinks() const {
        std::vector<double> out = std::visit(
            [](const auto& k) -> std::vector<double> {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, claim::Call> || std::is_same_v<K, claim::Put> ||
                              std::is_same_v<K, claim::Digital>)
                    return {k.strike};
                else if constexpr (std::is_same_v<K, claim::PiecewiseLinear>) return k.breakpoints;
                else if constexpr (std::is_same_v<K, claim::Scaled>) return k.inner->kinks();
                else return {};
            },
            kind_);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Discontinuity points.
    [[nodiscard]] std::vector<double> jumps() const {
        if (auto* d = std::get_if<claim::Digital>(&kind_)) return d->amount == 0.0 ? std::vector<double>{} : std::vector<double>{d->strike};
        if (auto* s = std::get_if<claim::Scaled>(&kind_)) return s->multiplier == 0.0 ? std::vector<double>{} : s->inner->jumps();
        return {};
    }

    [[nodiscard]] bool is_continuous() const { return jumps().empty(); }

    /// True when the payoff has a finite limit at X_T -> 0.
    [[nodiscard]] bool finite_at_zero() const {
        if (auto* l = std::get_if<claim::LogForward>(&kind_)) return l->scale == 0.0;
        if (auto* s = std::get_if<claim::Scaled>(&kind_)) return s->multiplier == 0.0 || s->inner->finite_at_zero();
        return true;
    }

    /// Max |payoff| over [lo, hi], floored at 1.
    [[nodiscard]] double scale(double lo = 100.0, double hi = 5000.0) const {
        double m = 0.0;
        auto probe = [&](double x) {
            if (x >= lo && x <= hi) m = std::max(m, std::abs((*this)(x)));
        };
        constexpr int n = 2000;
        for (int i = 0; i <= n; ++i) probe(lo + (hi - lo) * i / n);
        for (double k : kinks()) {
            probe(k);
            probe(std::nextafter(k, -1.0));
        }
        return std::max(m, 1.0);
    }

    /// "call", "digital", ...
    [[nodiscard]] std::string kind_name() const {
        static const char* names[] = {"call", "put", "digital", "quadratic_forward", "log_forward",
                                      "piecewise_linear", "constant", "scaled"};
        return names[kind_.index()];
    }

private:
    Kind kind_;

    void validate() const {
        std::visit(
            [](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, claim::PiecewiseLinear>) {
                    if (k.breakpoints.empty() || k.breakpoints.size() != k.values.size())
                        throw ValidationError("piecewise-linear claim needs matching nonempty breakpoints/values");
                    for (std::size_t i = 1; i < k.breakpoints.size(); ++i)
                        if (!(k.breakpoints[i] > k.breakpoints[i - 1]))
                            throw ValidationError("piecewise-linear breakpoints must be strictly increasing");
                    for (double v : k.values)
                        if (!std::isfinite(v)) throw ValidationError("piecewise-linear values must be finite");
                } else if constexpr (std::is_same_v<K, claim::Scaled>) {
                    if (!k.inner) throw ValidationError("scaled claim needs an inner claim");
                    if (!std::isfinite(k.multiplier)) throw ValidationError("multiplier must be finite");
                } else if constexpr (std::is_same_v<K, claim::Constant>) {
                    if (!std::isfinite(k.value)) throw ValidationError("constant must be finite");
                } else if constexpr (std::is_same_v<K, claim::Digital>) {
                    if (!(k.strike > 0.0) || !std::isfinite(k.amount))
                        throw ValidationError("digital needs positive strike and finite amount");
                } else if constexpr (std::is_same_v<K, claim::LogForward>) {
                    if (!(k.strike > 0.0) || !std::isfinite(k.scale))
                        throw ValidationError("log-forward needs positive strike and finite scale");
                } else {
                    if (!(k.strike > 0.0) || !std::isfinite(k.strike)) throw ValidationError("strike must be positive");
                }
            },
            kind_);
    }

    static double slope_pwl(const claim::PiecewiseLinear& k, double x) {
        const auto& xs = k.breakpoints;
        const auto& ys = k.values;
        if (xs.size() == 1) return 0.0;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        if (i == 0) i = 1;
        if (i >= xs.size()) i = xs.size() - 1;
        return (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    }

    static double eval_pwl(const claim::PiecewiseLinear& k, double x) {
        const auto& xs = k.breakpoints;
        const auto& ys = k.values;
        if (xs.size() == 1) return ys[0];
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        if (i == 0) i = 1;
        if (i >= xs.size()) i = xs.size() - 1;
        const double s = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
        return ys[i - 1] + s * (x - xs[i - 1]);
    }
};

/// Cash-flow obligation at maturity: sum of quantity * claim.
class Liability {
public:
    struct Term {
        ClaimSpec claim;
        double quantity = 1.0;
    };

    Liability() = default;
    Liability(ClaimSpec c) { add(std::move(c), 1.0); }  // NOLINT(google-explicit-constructor)

    Liability& add(ClaimSpec c, double quantity) {
        if (quantity != 0.0 && !c.is_zero()) terms_.push_back({std::move(c), quantity});
        return *this;
    }

    [[nodiscard]] Liability plus(const ClaimSpec& c, double quantity = 1.0) const {
        Liability out = *this;
        out.add(c, quantity);
        return out;
    }

    [[nodiscard]] double operator()(double x) const {
        double s = 0.0;
        for (const auto& t : terms_) s += t.quantity * t.claim(x);
        return s;
    }

    [[nodiscard]] bool empty() const { return terms_.empty(); }
    [[nodiscard]] const std::vector<Term>& terms() const { return terms_; }

private:
    std::vector<Term> terms_;
};

/// Id of a quoted option with the same payoff as `c` (unit call/put), if any.
inline std::optional<std::string> quoted_match(const QuoteBook& book, const ClaimSpec& c) {
    const ClaimSpec* base = &c;
    if (auto* s = std::get_if<claim::Scaled>(&c.kind())) base = s->inner.get();
    for (const auto& in : book.instruments()) {
        if (auto* bc = std::get_if<claim::Call>(&base->kind()))
            if (auto* ic = std::get_if<liqhedge::Call>(&in.kind); ic && ic->strike == bc->strike) return in.id;
        if (auto* bp = std::get_if<claim::Put>(&base->kind()))
            if (auto* ip = std::get_if<liqhedge::Put>(&in.kind); ip && ip->strike == bp->strike) return in.id;
    }
    return std::nullopt;
}

}  // namespace liqhedge
