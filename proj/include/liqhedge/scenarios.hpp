// SPDX-License-Identifier: Apache-2.0
//
// Law of the underlying at maturity and its discretization.
//
// The log-return log(X_T / X_0) is mu + sigma * Z with Z standard Student t
// with nu degrees of freedom (nu = +inf gives the Gaussian). The scenario grid
// is a composite Gauss-Legendre rule over equal-probability panels of the
// truncated Z-range.
#pragma once

#include "liqhedge/error.hpp"
#include "liqhedge/quadrature.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace liqhedge {

struct ViewModel {
    double mu = 0.0;
    double sigma = 0.0;
    double nu = std::numeric_limits<double>::infinity();
    double spot = 0.0;

    [[nodiscard]] bool gaussian() const { return std::isinf(nu); }

    void validate() const {
        if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
        if (!(nu > 2.0)) throw ValidationError("nu must exceed 2 (finite variance)");
        if (!(spot > 0.0) || !std::isfinite(spot)) throw ValidationError("spot must be positive");
    }

    /// Variance of the log-return.
    [[nodiscard]] double log_variance() const { return gaussian() ? sigma * sigma : sigma * sigma * nu / (nu - 2.0); }
};

struct GridOptions {
    int panels = 50;
    int nodes_per_panel = 20;
    double tail_mass = 1e-6;  // per side
    int tail_splits = 6;      // halvings of each outermost panel's probability

    void validate() const {
        if (panels < 1) throw ValidationError("panels must be >= 1");
        if (nodes_per_panel < 2) throw ValidationError("nodes_per_panel must be >= 2");
        if (!(tail_mass > 0.0 && tail_mass < 0.01)) throw ValidationError("tail_mass must lie in (0, 0.01)");
        if (tail_splits < 0 || tail_splits > 40) throw ValidationError("tail_splits must lie in [0, 40]");
    }
};

struct ScenarioGrid {
    std::vector<double> nodes;    // underlying levels, strictly increasing
    std::vector<double> weights;  // probabilities, sum to 1

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
    [[nodiscard]] bool empty() const { return nodes.empty(); }

    template <class F>
    [[nodiscard]] double expectation(F&& f) const {
        double s = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
        return s;
    }
};

namespace detail {

inline double standard_quantile(double nu, double p) {
    if (std::isinf(nu)) return boost::math::quantile(boost::math::normal_distribution<double>(), p);
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

inline double standard_pdf(double nu, double z) {
    if (std::isinf(nu)) return boost::math::pdf(boost::math::normal_distribution<double>(), z);
    return boost::math::pdf(boost::math::students_t_distribution<double>(nu), z);
}

}  // namespace detail

/// p-quantile of the log-return.
inline double quantile(const ViewModel& model, double p) {
    model.validate();
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
    return model.mu + model.sigma * detail::standard_quantile(model.nu, p);
}

inline ScenarioGrid build_grid(const ViewModel& model, const GridOptions& opts = {}) {
    model.validate();
    opts.validate();
    const auto rule = gauss_legendre(opts.nodes_per_panel);
    const double p_lo = opts.tail_mass, p_hi = 1.0 - opts.tail_mass;

    std::vector<double> probs;
    for (int i = 0; i <= opts.panels; ++i) probs.push_back(i == opts.panels ? p_hi : p_lo + (p_hi - p_lo) * i / opts.panels);
    // The outermost panels span most of the heavy tails in z; payoff kinks there need finer panels.
    const double first = (p_hi - p_lo) / opts.panels;
    for (int i = 1; i <= opts.tail_splits && opts.panels > 1; ++i) {
        const double q = std::ldexp(first, -i);
        if (q <= p_lo) break;
        probs.push_back(p_lo + q);
        probs.push_back(p_hi - q);
    }
    std::sort(probs.begin(), probs.end());
    std::vector<double> edges;
    edges.reserve(probs.size());
    for (double p : probs) edges.push_back(detail::standard_quantile(model.nu, p));

    ScenarioGrid grid;
    grid.nodes.reserve((edges.size() - 1) * static_cast<std::size_t>(opts.nodes_per_panel));
    grid.weights.reserve(grid.nodes.capacity());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i], b = edges[i + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            const double z = mid + half * rule.nodes[k];
            const double w = rule.weights[k] * half * detail::standard_pdf(model.nu, z);
            grid.nodes.push_back(model.spot * std::exp(model.mu + model.sigma * z));
            grid.weights.push_back(w);
            total += w;
        }
    }
    for (auto& w : grid.weights) w /= total;
    return grid;
}

/// n draws of X_T, deterministic for a given seed.
inline std::vector<double> sample(const ViewModel& model, std::size_t n, std::uint64_t seed) {
    model.validate();
    if (n < 1) throw ValidationError("sample size must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    if (model.gaussian()) {
        std::normal_distribution<double> z;
        for (auto& x : out) x = model.spot * std::exp(model.mu + model.sigma * z(rng));
    } else {
        std::student_t_distribution<double> z(model.nu);
        for (auto& x : out) x = model.spot * std::exp(model.mu + model.sigma * z(rng));
    }
    return out;
}

}  // namespace liqhedge
