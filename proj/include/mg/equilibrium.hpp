#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "mg/core.hpp"
#include "mg/price.hpp"

// Closed-form and root-finding analytics for the homogeneous mixed
// equilibrium: the zero-incentive arbitrage level A*, the implied strategy
// bias, fluctuation predictions and their scaling normalizer. Used both
// standalone (CLI `nash`) and as oracles for the engine tests.

namespace mg {

struct EquilibriumReport {
    double a_star = 0.0;
    double bias_p = 0.5;
    double w_total = 0.0;
    double x = 1.0;
    double effective_agents = 0.0;
    double sigma_a_pred = 0.0;
    double mean_a_pred = 0.0;
    double sigma_over_mean = 0.0;
    bool saturated = false;
};

struct AStarResult {
    double value = 0.0;
    /// No sign change in the bracket: every (or no) agent arbitraging still
    /// leaves the price on one side of I. side = +1 means R stays below I
    /// (all-in equilibrium), -1 means R stays above I (all-out).
    bool saturated = false;
    int side = 0;
    double residual = 0.0;  // R(value + eta_mean) - I
};

namespace detail {

inline AStarResult bisect_a_star(const PriceSpec& spec, double intraday, double eta_mean,
                                 double lo, double hi) {
    const double tol = 1e-9 * std::max(1.0, std::abs(intraday));
    auto f = [&](double x) { return eval_price(spec, x + eta_mean) - intraday; };
    double flo = f(lo);
    double fhi = f(hi);
    AStarResult r;
    if (flo > 0.0 && fhi > 0.0) {
        r.value = lo;
        r.saturated = true;
        r.side = -1;
        r.residual = flo;
        return r;
    }
    if (flo < 0.0 && fhi < 0.0) {
        r.value = hi;
        r.saturated = true;
        r.side = +1;
        r.residual = fhi;
        return r;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < tol) {
            r.value = mid;
            r.residual = fm;
            return r;
        }
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    r.value = 0.5 * (lo + hi);
    r.residual = f(r.value);
    return r;
}

}  // namespace detail

/// Solve R(A* + eta_mean) = I. Closed forms for the analytic price families;
/// bisection over the supplied bracket (or the price domain, or an expanding
/// bracket) otherwise.
inline AStarResult solve_a_star(const PriceSpec& spec, double intraday_price,
                                double eta_mean = 0.0,
                                std::optional<std::pair<double, double>> bracket = std::nullopt) {
    AStarResult r;
    if (spec.get_if<IdentityPrice>()) {
        r.value = intraday_price - eta_mean;
        return r;
    }
    if (const auto* p = spec.get_if<ScaledLinearPrice>()) {
        if (p->c != 0.0) {
            r.value = intraday_price * p->divisor / p->c - eta_mean;
            return r;
        }
    }
    if (const auto* p = spec.get_if<AffinePrice>()) {
        r.value = p->a_star + (intraday_price - p->intercept) / p->slope - eta_mean;
        return r;
    }
    if (const auto* p = spec.get_if<QuadraticPrice>()) {
        if (p->c2 == 0.0) {
            r.value = intraday_price - eta_mean;
            return r;
        }
        const double disc = 1.0 + 4.0 * p->c2 * intraday_price;
        if (disc >= 0.0) {
            // Root on the monotone branch.
            r.value = (-1.0 + std::sqrt(disc)) / (2.0 * p->c2) - eta_mean;
            return r;
        }
        r.saturated = true;
        r.side = p->c2 > 0.0 ? -1 : +1;
        r.value = -1.0 / (2.0 * p->c2) - eta_mean;
        r.residual = eval_price(spec, r.value + eta_mean) - intraday_price;
        return r;
    }

    if (bracket) return detail::bisect_a_star(spec, intraday_price, eta_mean, bracket->first,
                                              bracket->second);
    const PriceDomain dom = price_domain(spec);
    if (dom.bounded)
        return detail::bisect_a_star(spec, intraday_price, eta_mean, dom.lo - eta_mean,
                                     dom.hi - eta_mean);
    // Expanding bracket around zero for unbounded non-analytic specs.
    double b = 1.0;
    auto f = [&](double x) { return eval_price(spec, x + eta_mean) - intraday_price; };
    for (int i = 0; i < 60 && f(-b) * f(b) > 0.0; ++i) b *= 2.0;
    return detail::bisect_a_star(spec, intraday_price, eta_mean, -b, b);
}

/// Fluctuation prediction of the no-anti-coordination equilibrium:
/// sigma^2 = (W^2 - a*^2) X / N, mean = a*. |a*| > W yields the saturated
/// deterministic report (all agents on one side, zero variance).
inline EquilibriumReport nash_variance(const WeightVector& weights, double a_star) {
    const Heterogeneity het = weights.heterogeneity();
    EquilibriumReport rep;
    rep.w_total = weights.total();
    rep.x = het.x;
    rep.effective_agents = het.effective_agents;
    rep.a_star = a_star;
    if (std::abs(a_star) >= rep.w_total) {
        rep.saturated = true;
        rep.mean_a_pred = a_star > 0.0 ? rep.w_total : -rep.w_total;
        rep.sigma_a_pred = 0.0;
        rep.bias_p = a_star > 0.0 ? 1.0 : 0.0;
        rep.sigma_over_mean = 0.0;
        return rep;
    }
    rep.mean_a_pred = a_star;
    const double ratio = a_star / rep.w_total;
    // (W^2 - a*^2) X / N == sum(w^2) (1 - (a*/W)^2); the latter is better
    // conditioned, so compute it that way.
    rep.sigma_a_pred = std::sqrt(weights.sum_squares() * (1.0 - ratio * ratio));
    rep.bias_p = bias_from_equilibrium(a_star, rep.w_total);
    rep.sigma_over_mean = a_star != 0.0 ? rep.sigma_a_pred / std::abs(a_star)
                                        : std::numeric_limits<double>::infinity();
    return rep;
}

/// Equilibrium mean of A at quadratic order of the price expansion:
/// <A> = a* - (c2/c1) (var_A + var_eta).
inline double quadratic_mean_shift(double c1, double c2, double var_a, double var_eta,
                                   double a_star) {
    if (!(c1 > 0.0)) throw ConfigError("quadratic_mean_shift: c1 must be positive");
    return a_star - (c2 / c1) * (var_a + var_eta);
}

/// Normalizer sqrt((W^2 - a*^2) X / N) used by the collapse analyses; the
/// measured sigma_A divided by this is the collapse variable. The
/// proportionality factor versus alpha is measured, not predicted.
inline double collapse_normalizer(const WeightVector& weights, double a_star) {
    const EquilibriumReport rep = nash_variance(weights, a_star);
    if (rep.saturated || !(rep.sigma_a_pred > 0.0))
        throw ConfigError("collapse_normalizer: saturated input has no normalizer");
    return rep.sigma_a_pred;
}

/// First-order variance multiplication factor from adding one arbitrageur of
/// weight new_weight at mean arbitrage mean_a. Always > 1 for valid input.
inline double added_arbitrageur_factor(const WeightVector& weights, double new_weight,
                                       double mean_a) {
    const double w_total = weights.total();
    if (!(std::abs(mean_a) < w_total))
        throw ConfigError("added_arbitrageur_factor: |mean| must be below W");
    const double mu2 = mean_a * mean_a;
    return 1.0 + new_weight * 2.0 * mu2 / (w_total * (w_total * w_total - mu2)) +
           new_weight * new_weight / weights.sum_squares();
}

/// Fluctuation-to-mean estimate sqrt((W/mu)^2 - 1) / sqrt(N/X); the W/mu
/// ratio is an input assumption (default sqrt(5)), an order of magnitude
/// rather than a derived quantity.
inline double fluctuation_to_mean(const WeightVector& weights, double w_over_mu = std::sqrt(5.0)) {
    if (!(w_over_mu > 1.0)) throw ConfigError("fluctuation_to_mean: W/mu must exceed 1");
    const Heterogeneity het = weights.heterogeneity();
    return std::sqrt(w_over_mu * w_over_mu - 1.0) / std::sqrt(het.effective_agents);
}

}  // namespace mg
