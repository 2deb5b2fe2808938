#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "mg/config_io.hpp"
#include "mg/core.hpp"
#include "mg/price.hpp"
#include "mg/rng.hpp"
#include "mg/stats.hpp"

// The repeated-game dynamics: signal draw, risk-aversion gating, best-strategy
// selection, imbalance aggregation, price realization and evaluation updates,
// plus the convergence-controlled run loop and ensemble driver.

namespace mg {

/// Scalars produced by one step. Per-agent actions stay inside the Game and
/// are exposed as a span to avoid copying them every step.
struct StepOutcome {
    long t = 0;  // step index that was just executed (0-based)
    int mu = 0;  // drawn pattern, 0-based internally
    double arbitrage = 0.0;
    double eta = 0.0;
    double total_imbalance = 0.0;
    double price = 0.0;
    int active_count = 0;
};

/// One game instance. Strictly sequential; parallelism lives at the ensemble
/// level where every worker owns its own instance.
class Game {
public:
    explicit Game(const GameConfig& cfg)
        : Game(cfg, draw_strategies(cfg.n_agents, cfg.n_strategies, cfg.n_patterns,
                                    cfg.strategy_bias, cfg.seed)) {}

    Game(const GameConfig& cfg, StrategyTable strategies)
        : cfg_(cfg),
          strategies_(std::move(strategies)),
          weights_(cfg.weights()),
          evals_(static_cast<std::size_t>(cfg.n_agents) * cfg.n_strategies, 0.0),
          actions_(static_cast<std::size_t>(cfg.n_agents), 0),
          signal_(derive_seed(cfg.seed, Stream::signal)),
          noise_(derive_seed(cfg.seed, Stream::noise)) {
        cfg_.validate();
        if (strategies_.n_agents() != cfg_.n_agents ||
            strategies_.n_strategies() != cfg_.n_strategies ||
            strategies_.n_patterns() != cfg_.n_patterns)
            throw ConfigError("Game: strategy table does not match config");
        bind_price_divisor();
        tie_.reserve(static_cast<std::size_t>(cfg_.n_agents));
        for (int i = 0; i < cfg_.n_agents; ++i)
            tie_.emplace_back(derive_seed(cfg_.seed, Stream::tie_break,
                                          static_cast<std::uint64_t>(i)));
        if (const auto* q = cfg_.price.get_if<QuadraticPrice>()) {
            monotone_lo_ = q->monotone_floor();
            monotone_hi_ = q->monotone_ceil();
        }
    }

    /// Advance one step. Order: draw mu; gate each agent on max_s U_s/t;
    /// active agents play their best strategy (ties uniform from the agent's
    /// own stream), inactive agents play 0; aggregate A; draw eta; realize the
    /// price; update every strategy of every agent. Throws ReserveExhausted.
    StepOutcome step() {
        const int P = cfg_.n_patterns;
        const int N = cfg_.n_agents;
        const int S = cfg_.n_strategies;
        const int mu = static_cast<int>(signal_.uniform_below(static_cast<std::uint64_t>(P)));
        const std::span<const std::int8_t> slice = strategies_.pattern_slice(mu);

        double arbitrage = 0.0;
        int active = 0;
        const double t_now = static_cast<double>(t_);
        for (int i = 0; i < N; ++i) {
            const double* u = evals_.data() + static_cast<std::size_t>(i) * S;
            double best = u[0];
            int best_s = 0;
            int ties = 1;
            for (int s = 1; s < S; ++s) {
                if (u[s] > best) {
                    best = u[s];
                    best_s = s;
                    ties = 1;
                } else if (u[s] == best) {
                    ++ties;
                }
            }
            bool is_active = true;
            if (t_ > 0) {
                const RiskAversion ra = cfg_.risk_of(i);
                if (!ra.never_gates()) is_active = best / t_now >= ra.epsilon();
            }
            std::int8_t a = 0;
            if (is_active) {
                if (ties > 1) {
                    std::uint64_t pick = tie_[static_cast<std::size_t>(i)].uniform_below(
                        static_cast<std::uint64_t>(ties));
                    for (int s = 0; s < S; ++s) {
                        if (u[s] == best && pick-- == 0) {
                            best_s = s;
                            break;
                        }
                    }
                }
                a = slice[static_cast<std::size_t>(i) * S + best_s];
                ++active;
            }
            actions_[static_cast<std::size_t>(i)] = a;
            arbitrage += weights_.w[static_cast<std::size_t>(i)] * a;
        }

        double eta = 0.0;
        if (cfg_.noise.kind == NoiseSpec::Kind::gaussian)
            eta = noise_.gaussian(cfg_.noise.mean, cfg_.noise.sigma);

        const double total = arbitrage + eta;
        const double price = eval_price(cfg_.price, total);
        if (total < monotone_lo_ || total > monotone_hi_) ++monotone_violations_;

        const double eval_pay =
            cfg_.eval_uses_noise ? cfg_.intraday_price - price
                                 : cfg_.intraday_price - eval_price(cfg_.price, arbitrage);
        if (cfg_.update_inactive) {
            double* u = evals_.data();
            const std::size_t n = evals_.size();
            for (std::size_t k = 0; k < n; ++k) u[k] += slice[k] * eval_pay;
        } else {
            for (int i = 0; i < N; ++i) {
                if (actions_[static_cast<std::size_t>(i)] == 0 && t_ > 0) continue;
                double* u = evals_.data() + static_cast<std::size_t>(i) * S;
                const std::int8_t* si = slice.data() + static_cast<std::size_t>(i) * S;
                for (int s = 0; s < S; ++s) u[s] += si[s] * eval_pay;
            }
        }

        StepOutcome out;
        out.t = t_;
        out.mu = mu;
        out.arbitrage = arbitrage;
        out.eta = eta;
        out.total_imbalance = total;
        out.price = price;
        out.active_count = active;
        ++t_;
        return out;
    }

    long step_count() const noexcept { return t_; }
    long monotone_violations() const noexcept { return monotone_violations_; }
    std::span<const std::int8_t> actions() const noexcept { return actions_; }
    std::span<const double> evaluations() const noexcept { return evals_; }
    const StrategyTable& strategies() const noexcept { return strategies_; }
    const WeightVector& weights() const noexcept { return weights_; }
    const GameConfig& config() const noexcept { return cfg_; }

private:
    void bind_price_divisor() {
        if (auto* p = std::get_if<ScaledLinearPrice>(&cfg_.price.variant()))
            if (p->divisor <= 0.0) p->divisor = static_cast<double>(cfg_.n_agents);
    }

    GameConfig cfg_;
    StrategyTable strategies_;
    WeightVector weights_;
    std::vector<double> evals_;
    std::vector<std::int8_t> actions_;
    Rng signal_, noise_;
    std::vector<Rng> tie_;
    long t_ = 0;
    long monotone_violations_ = 0;
    double monotone_lo_ = -std::numeric_limits<double>::infinity();
    double monotone_hi_ = std::numeric_limits<double>::infinity();
};

/// Converged observables of one run plus provenance. Statistics cover exactly
/// the last half of the executed steps.
struct RunResult {
    double mean_a = 0.0;
    double sigma_a = 0.0;
    double sigma_total = 0.0;
    double excess_kurtosis = 0.0;
    double mean_active_fraction = 0.0;
    Histogram hist_a;
    Histogram hist_total;
    long steps_run = 0;
    bool converged = false;
    bool reserve_exhausted = false;
    double exhaustion_overshoot = 0.0;
    long monotone_violations = 0;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double sigma_of_range(std::span<const double> xs, std::size_t lo, std::size_t hi) {
    MomentAccumulator acc;
    for (std::size_t i = lo; i < hi; ++i) acc.add(xs[i]);
    return acc.stddev();
}

}  // namespace detail

/// Run one game until the stopping criterion fires or max_steps is reached.
/// At geometrically growing checkpoints (t = 1000 * 2^k) the deviation of A
/// over the third and fourth quarters of the steps so far is compared; the
/// run stops once they agree to within convergence_tol relative. `on_step`
/// is called after every step with (game, outcome).
template <class F>
RunResult run_with_callback(const GameConfig& cfg, F&& on_step) {
    Game game(cfg);
    std::vector<double> a_series, total_series;
    std::vector<int> active_series;
    const std::size_t cap = static_cast<std::size_t>(cfg.max_steps);
    a_series.reserve(std::min<std::size_t>(cap, 1u << 21));
    total_series.reserve(std::min<std::size_t>(cap, 1u << 21));
    active_series.reserve(std::min<std::size_t>(cap, 1u << 21));

    RunResult result;
    result.seed = cfg.seed;
    result.config_hash = config_hash(cfg);

    long next_check = 1000;
    bool converged = false;
    while (game.step_count() < cfg.max_steps) {
        StepOutcome out;
        try {
            out = game.step();
        } catch (const ReserveExhausted& e) {
            result.reserve_exhausted = true;
            result.exhaustion_overshoot = e.overshoot;
            break;
        }
        a_series.push_back(out.arbitrage);
        total_series.push_back(out.total_imbalance);
        active_series.push_back(out.active_count);
        on_step(game, out);

        const long t = game.step_count();
        if (t == next_check || t == cfg.max_steps) {
            if (cfg.convergence_tol > 0.0 && t >= 4) {
                const std::size_t n = a_series.size();
                const std::size_t half = n / 2;
                const std::size_t q3 = half + (n - half) / 2;
                const double s3 = detail::sigma_of_range(a_series, half, q3);
                const double s4 = detail::sigma_of_range(a_series, q3, n);
                const double denom = std::max(s3, s4);
                if (denom == 0.0 || std::abs(s3 - s4) / denom < cfg.convergence_tol) {
                    converged = true;
                    break;
                }
            }
            next_check *= 2;
        }
    }

    result.converged = converged;
    result.steps_run = game.step_count();
    result.monotone_violations = game.monotone_violations();

    const std::size_t n = a_series.size();
    if (n > 0) {
        const std::size_t lo = n / 2;
        MomentAccumulator acc_a, acc_total;
        double active_sum = 0.0;
        for (std::size_t i = lo; i < n; ++i) {
            acc_a.add(a_series[i]);
            acc_total.add(total_series[i]);
            active_sum += active_series[i];
        }
        result.mean_a = acc_a.mean();
        result.sigma_a = acc_a.stddev();
        result.sigma_total = acc_total.stddev();
        result.excess_kurtosis = acc_a.excess_kurtosis();
        result.mean_active_fraction =
            active_sum / (static_cast<double>(n - lo) * cfg.n_agents);
        const std::span<const double> tail_a{a_series.data() + lo, n - lo};
        const std::span<const double> tail_total{total_series.data() + lo, n - lo};
        result.hist_a = make_histogram(tail_a);
        result.hist_a.has_overlay = true;
        result.hist_a.overlay_mean = result.mean_a;
        result.hist_a.overlay_std = result.sigma_a;
        result.hist_total = make_histogram(tail_total);
    }
    return result;
}

inline RunResult run_until_converged(const GameConfig& cfg) {
    return run_with_callback(cfg, [](const Game&, const StepOutcome&) {});
}

// ---- Ensembles -----------------------------------------------------------------

struct EnsembleStat {
    double mean = 0.0;
    double std_error = 0.0;

    static EnsembleStat of(std::span<const double> xs) {
        EnsembleStat s;
        if (xs.empty()) return s;
        double sum = 0.0;
        for (double x : xs) sum += x;
        s.mean = sum / static_cast<double>(xs.size());
        if (xs.size() > 1) {
            double ss = 0.0;
            for (double x : xs) ss += (x - s.mean) * (x - s.mean);
            s.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                          std::sqrt(static_cast<double>(xs.size()));
        }
        return s;
    }
};

struct EnsembleResult {
    EnsembleStat mean_a, sigma_a, sigma_total, excess_kurtosis, active_fraction;
    int sample_count = 0;
    int converged_count = 0;
    int exhausted_count = 0;
    long total_steps = 0;
    std::uint64_t seed_base = 0;
    std::uint64_t config_hash = 0;
    std::vector<RunResult> runs;  // indexed by sample, independent of scheduling
};

/// Aggregate per-run results (in sample-index order) into ensemble means and
/// standard errors. Commutative over scheduling: only the index order matters.
inline EnsembleResult aggregate_runs(std::vector<RunResult> runs, std::uint64_t seed_base,
                                     std::uint64_t cfg_hash) {
    EnsembleResult out;
    out.sample_count = static_cast<int>(runs.size());
    out.seed_base = seed_base;
    out.config_hash = cfg_hash;
    out.runs = std::move(runs);
    std::vector<double> mean_a, sigma_a, sigma_total, kurt, active;
    for (const auto& r : out.runs) {
        mean_a.push_back(r.mean_a);
        sigma_a.push_back(r.sigma_a);
        sigma_total.push_back(r.sigma_total);
        kurt.push_back(r.excess_kurtosis);
        active.push_back(r.mean_active_fraction);
        out.total_steps += r.steps_run;
        if (r.converged) ++out.converged_count;
        if (r.reserve_exhausted) ++out.exhausted_count;
    }
    out.mean_a = EnsembleStat::of(mean_a);
    out.sigma_a = EnsembleStat::of(sigma_a);
    out.sigma_total = EnsembleStat::of(sigma_total);
    out.excess_kurtosis = EnsembleStat::of(kurt);
    out.active_fraction = EnsembleStat::of(active);
    return out;
}

/// Run `sample_count` independent games with derived seeds and fresh strategy
/// draws, optionally on a worker pool. Results are aggregated in sample-index
/// order, so the outcome does not depend on the number of workers.
inline EnsembleResult run_ensemble(const GameConfig& cfg, int sample_count,
                                   std::uint64_t seed_base, int workers = 0) {
    if (sample_count < 1) throw ConfigError("run_ensemble: sample_count must be >= 1");
    std::vector<RunResult> runs(static_cast<std::size_t>(sample_count));

    auto run_one = [&](int i) {
        GameConfig sample_cfg = cfg;
        sample_cfg.seed = derive_seed(seed_base, Stream::ensemble, static_cast<std::uint64_t>(i));
        runs[static_cast<std::size_t>(i)] = run_until_converged(sample_cfg);
    };

    int n_workers = workers > 0 ? workers
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min(n_workers, sample_count));
    if (n_workers == 1) {
        for (int i = 0; i < sample_count; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < sample_count; i = next.fetch_add(1))
                    run_one(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return aggregate_runs(std::move(runs), seed_base, config_hash(cfg));
}

inline EnsembleResult run_ensemble(const GameConfig& cfg, int workers = 0) {
    return run_ensemble(cfg, cfg.sample_count, cfg.seed, workers);
}

}  // namespace mg
