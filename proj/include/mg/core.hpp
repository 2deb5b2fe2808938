#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mg/price.hpp"
#include "mg/rng.hpp"

// Domain types shared by the engine, the analytics and the harness:
// weights and their heterogeneity, strategy pools, noise, risk aversion
// and the full game configuration.

namespace mg {

// ---- Weights -------------------------------------------------------------------

struct Heterogeneity {
    double x = 1.0;                // <w^2> / <w>^2, always >= 1
    double effective_agents = 0.0; // N / X
};

/// Weight heterogeneity X and the effective number of agents N/X.
/// Throws on an all-zero (or empty) weight vector.
inline Heterogeneity heterogeneity(std::span<const double> w) {
    if (w.empty()) throw ConfigError("heterogeneity: empty weight vector");
    double sum = 0.0, sumsq = 0.0;
    for (double wi : w) {
        sum += wi;
        sumsq += wi * wi;
    }
    if (!(sum > 0.0)) throw ConfigError("heterogeneity: weights must not be all zero");
    const double n = static_cast<double>(w.size());
    Heterogeneity h;
    h.x = (sumsq / n) / ((sum / n) * (sum / n));
    h.effective_agents = n / h.x;
    return h;
}

struct WeightVector {
    std::vector<double> w;

    double total() const noexcept { return std::accumulate(w.begin(), w.end(), 0.0); }
    double sum_squares() const noexcept {
        double s = 0.0;
        for (double wi : w) s += wi * wi;
        return s;
    }
    Heterogeneity heterogeneity() const { return mg::heterogeneity(w); }
    std::size_t size() const noexcept { return w.size(); }
};

struct UniformWeights {
    double w_total = 0.0;  // 0 means "W = N", i.e. unit weights
};
struct ExponentialWeights {
    double mean = 1.0;
};
struct ParetoWeights {
    double exponent = 4.0;     // density exponent: P(w) ~ w^-exponent
    double lower = 2.0 / 3.0;  // support lower bound
};
struct RealisticWeights {};  // the fixed 120-party MW table
struct ExplicitWeights {
    std::vector<double> values;
};

using WeightSpec =
    std::variant<UniformWeights, ExponentialWeights, ParetoWeights, RealisticWeights,
                 ExplicitWeights>;

inline constexpr int kRealisticAgentCount = 120;

/// The fixed realistic weight table, in MW. Totals 5500 MW over 120 parties.
inline std::vector<double> realistic_weight_table() {
    std::vector<double> w(kRealisticAgentCount);
    for (int i = 0; i < 5; ++i) w[i] = 400.0;
    for (int i = 5; i < 10; ++i) w[i] = 160.0;
    for (int i = 10; i < 20; ++i) w[i] = 120.0;
    for (int i = 20; i < 120; ++i) w[i] = 15.0;
    return w;
}

/// Build a weight vector. Sampled families (exponential, pareto) are drawn
/// i.i.d. from the weight_draw stream of `root_seed` and rescaled to unit
/// empirical mean, so W = N exactly for those families.
inline WeightVector make_weights(const WeightSpec& spec, int n_agents, std::uint64_t root_seed) {
    if (n_agents < 1) throw ConfigError("make_weights: n_agents must be >= 1");
    WeightVector out;
    if (const auto* u = std::get_if<UniformWeights>(&spec)) {
        const double total = u->w_total > 0.0 ? u->w_total : static_cast<double>(n_agents);
        out.w.assign(static_cast<std::size_t>(n_agents), total / n_agents);
        return out;
    }
    if (std::get_if<RealisticWeights>(&spec)) {
        if (n_agents != kRealisticAgentCount)
            throw ConfigError("make_weights: realistic weights require exactly 120 agents");
        out.w = realistic_weight_table();
        return out;
    }
    if (const auto* e = std::get_if<ExplicitWeights>(&spec)) {
        if (static_cast<int>(e->values.size()) != n_agents)
            throw ConfigError("make_weights: explicit weight count differs from n_agents");
        for (double wi : e->values)
            if (wi < 0.0) throw ConfigError("make_weights: weights must be nonnegative");
        out.w = e->values;
        if (!(out.total() > 0.0)) throw ConfigError("make_weights: total weight must be positive");
        return out;
    }

    Rng rng(derive_seed(root_seed, Stream::weight_draw));
    out.w.resize(static_cast<std::size_t>(n_agents));
    if (const auto* e = std::get_if<ExponentialWeights>(&spec)) {
        for (auto& wi : out.w) {
            double u = rng.uniform01();
            if (u <= 0.0) u = 0x1.0p-53;
            wi = -e->mean * std::log(u);
        }
    } else if (const auto* p = std::get_if<ParetoWeights>(&spec)) {
        if (!(p->exponent > 2.0) || !(p->lower > 0.0))
            throw ConfigError("make_weights: pareto needs exponent > 2 and lower > 0");
        const double shape = p->exponent - 1.0;  // density w^-exponent has shape exponent-1
        for (auto& wi : out.w) {
            double u = rng.uniform01();
            if (u >= 1.0) u = 1.0 - 0x1.0p-53;
            wi = p->lower * std::pow(1.0 - u, -1.0 / shape);
        }
    } else {
        throw ConfigError("make_weights: unhandled weight family");
    }
    const double mean = out.total() / n_agents;
    for (auto& wi : out.w) wi /= mean;
    return out;
}

// ---- Strategies ------------------------------------------------------------------

/// Fixed pool of per-agent strategies: entries in {-1, +1} indexed by
/// (pattern, agent, strategy). Immutable after construction; the layout keeps
/// one pattern's slice contiguous, which is what the engine touches per step.
class StrategyTable {
public:
    StrategyTable(int n_agents, int n_strategies, int n_patterns, std::vector<std::int8_t> entries)
        : n_agents_(n_agents),
          n_strategies_(n_strategies),
          n_patterns_(n_patterns),
          e_(std::move(entries)) {
        if (e_.size() != static_cast<std::size_t>(n_agents) * n_strategies * n_patterns)
            throw ConfigError("StrategyTable: entry count mismatch");
    }

    int n_agents() const noexcept { return n_agents_; }
    int n_strategies() const noexcept { return n_strategies_; }
    int n_patterns() const noexcept { return n_patterns_; }

    std::int8_t at(int pattern, int agent, int strategy) const noexcept {
        return e_[index(pattern, agent, strategy)];
    }

    /// Contiguous slice of all (agent, strategy) decisions for one pattern.
    std::span<const std::int8_t> pattern_slice(int pattern) const noexcept {
        const std::size_t stride = static_cast<std::size_t>(n_agents_) * n_strategies_;
        return {e_.data() + static_cast<std::size_t>(pattern) * stride, stride};
    }

    double empirical_mean() const noexcept {
        long long s = 0;
        for (auto v : e_) s += v;
        return static_cast<double>(s) / static_cast<double>(e_.size());
    }

private:
    std::size_t index(int pattern, int agent, int strategy) const noexcept {
        return (static_cast<std::size_t>(pattern) * n_agents_ + agent) * n_strategies_ + strategy;
    }

    int n_agents_, n_strategies_, n_patterns_;
    std::vector<std::int8_t> e_;
};

/// Draw a strategy pool: each entry is +1 with probability `bias`,
/// independently. Agent i draws from its own sub-stream, so tables are
/// reproducible per agent regardless of N. Draw order within an agent is
/// strategy-major, then pattern.
inline StrategyTable draw_strategies(int n_agents, int n_strategies, int n_patterns, double bias,
                                     std::uint64_t root_seed) {
    if (bias < 0.0 || bias > 1.0) throw ConfigError("draw_strategies: bias must be in [0,1]");
    if (n_agents < 1 || n_strategies < 1 || n_patterns < 1)
        throw ConfigError("draw_strategies: dimensions must be positive");
    const std::size_t stride = static_cast<std::size_t>(n_agents) * n_strategies;
    std::vector<std::int8_t> e(stride * static_cast<std::size_t>(n_patterns));
    for (int agent = 0; agent < n_agents; ++agent) {
        Rng rng(derive_seed(root_seed, Stream::strategy_draw, static_cast<std::uint64_t>(agent)));
        for (int s = 0; s < n_strategies; ++s) {
            for (int mu = 0; mu < n_patterns; ++mu) {
                const std::int8_t v = rng.uniform01() < bias ? +1 : -1;
                e[(static_cast<std::size_t>(mu) * n_agents + agent) * n_strategies + s] = v;
            }
        }
    }
    return StrategyTable(n_agents, n_strategies, n_patterns, std::move(e));
}

/// Strategy-entry bias implied by the homogeneous mixed equilibrium:
/// p = 1/2 + a_star / (2 W), clipped to [0, 1].
inline double bias_from_equilibrium(double a_star, double w_total) {
    if (!(w_total > 0.0)) throw ConfigError("bias_from_equilibrium: W must be positive");
    const double p = 0.5 + a_star / (2.0 * w_total);
    return std::clamp(p, 0.0, 1.0);
}

// ---- Risk aversion ----------------------------------------------------------------

/// Per-agent participation threshold. "never" is an explicit sentinel (the
/// agent is always active), kept separate from the float so comparisons stay
/// exact.
class RiskAversion {
public:
    static RiskAversion never() { return RiskAversion(true, 0.0); }
    static RiskAversion threshold(double eps) { return RiskAversion(false, eps); }

    RiskAversion() : RiskAversion(true, 0.0) {}

    bool never_gates() const noexcept { return never_; }
    double epsilon() const noexcept { return eps_; }

    bool operator==(const RiskAversion& o) const noexcept {
        return never_ == o.never_ && (never_ || eps_ == o.eps_);
    }

private:
    RiskAversion(bool never_gate, double eps) : never_(never_gate), eps_(eps) {}
    bool never_;
    double eps_;
};

// ---- Noise -----------------------------------------------------------------------

struct NoiseSpec {
    enum class Kind { none, gaussian };
    Kind kind = Kind::none;
    double sigma = 0.0;  // sigma_eta, >= 0
    double mean = 0.0;   // fixed 0 in all reference experiments

    static NoiseSpec none() { return {}; }
    static NoiseSpec gaussian(double sigma, double mean = 0.0) {
        if (sigma < 0.0) throw ConfigError("noise: sigma must be nonnegative");
        return {Kind::gaussian, sigma, mean};
    }
    bool is_silent() const noexcept { return kind == Kind::none || sigma == 0.0; }
};

// ---- Game configuration -------------------------------------------------------------

/// Full parameterization of one game instance. alpha = P/N is derived, never
/// stored. Immutable by convention once validated; runs never mutate it.
struct GameConfig {
    int n_agents = 0;        // N
    int n_patterns = 0;      // P
    int n_strategies = 2;    // S
    double intraday_price = 0.0;  // I

    std::vector<RiskAversion> risk_aversion;  // size N; empty means all "never"
    WeightSpec weight_spec = UniformWeights{};
    PriceSpec price;
    NoiseSpec noise;
    double strategy_bias = 0.5;  // p, probability of a +1 entry

    std::uint64_t seed = 1;
    long max_steps = 2'000'000;
    double convergence_tol = 1e-3;  // <= 0 disables early stopping
    int sample_count = 100;

    /// Evaluations score the realized price R(A + eta); switch off to score
    /// the noise-free R(A) instead, for A/B comparison.
    bool eval_uses_noise = true;
    /// Gated-out agents keep updating their evaluations by default.
    bool update_inactive = true;

    double alpha() const noexcept {
        return static_cast<double>(n_patterns) / static_cast<double>(n_agents);
    }

    /// Realize the weight vector for this config (deterministic in the seed).
    WeightVector weights() const { return make_weights(weight_spec, n_agents, seed); }

    void validate() const {
        if (n_agents < 1) throw ConfigError("config: n_agents must be >= 1");
        if (n_patterns < 1) throw ConfigError("config: n_patterns must be >= 1");
        if (n_strategies < 1) throw ConfigError("config: n_strategies must be >= 1");
        if (!risk_aversion.empty() &&
            risk_aversion.size() != static_cast<std::size_t>(n_agents))
            throw ConfigError("config: risk_aversion length must equal n_agents");
        if (strategy_bias < 0.0 || strategy_bias > 1.0)
            throw ConfigError("config: strategy_bias must be in [0,1]");
        if (max_steps < 1) throw ConfigError("config: max_steps must be >= 1");
        if (sample_count < 1) throw ConfigError("config: sample_count must be >= 1");
        if (noise.sigma < 0.0) throw ConfigError("config: noise sigma must be nonnegative");
        make_weights(weight_spec, n_agents, seed);  // surfaces weight errors early
    }

    RiskAversion risk_of(int agent) const noexcept {
        return risk_aversion.empty() ? RiskAversion::never() : risk_aversion[agent];
    }
};

}  // namespace mg
