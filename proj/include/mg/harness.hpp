#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mg/config_io.hpp"
#include "mg/core.hpp"
#include "mg/engine.hpp"

// Parameter sweeps over a cartesian grid and the high/low weight split used
// by the heterogeneous risk-aversion experiments.

namespace mg {

// ---- Weight split --------------------------------------------------------------

struct WeightSplit {
    std::vector<int> high_group;  // agent indices, descending weight
    std::vector<int> low_group;
    double high_weight = 0.0;
    double low_weight = 0.0;
    double achieved_ratio = 0.0;  // high_weight / W, in [0.5, 0.5 + max w_i / W]
};

/// Split agents into a high-weight and a low-weight group of (as nearly as
/// possible) equal total weight: sort by descending weight and take the
/// greedy prefix until the cumulative weight first reaches W/2.
inline WeightSplit split_by_weight(const WeightVector& weights) {
    if (weights.size() < 2) throw ConfigError("split_by_weight: need at least two agents");
    const double total = weights.total();
    std::vector<int> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return weights.w[static_cast<std::size_t>(a)] > weights.w[static_cast<std::size_t>(b)];
    });
    WeightSplit split;
    double acc = 0.0;
    std::size_t k = 0;
    for (; k < order.size(); ++k) {
        acc += weights.w[static_cast<std::size_t>(order[k])];
        split.high_group.push_back(order[k]);
        if (acc >= 0.5 * total) {
            ++k;
            break;
        }
    }
    for (; k < order.size(); ++k) split.low_group.push_back(order[k]);
    split.high_weight = acc;
    split.low_weight = total - acc;
    split.achieved_ratio = acc / total;
    return split;
}

/// Risk-aversion vector with one epsilon for the high-weight group and
/// another for the low-weight group.
inline std::vector<RiskAversion> grouped_risk_aversion(const WeightVector& weights,
                                                       RiskAversion high, RiskAversion low) {
    const WeightSplit split = split_by_weight(weights);
    std::vector<RiskAversion> out(weights.size(), low);
    for (int i : split.high_group) out[static_cast<std::size_t>(i)] = high;
    return out;
}

// ---- Parameter paths -------------------------------------------------------------

/// Set one sweepable parameter on a config. Paths name GameConfig fields;
/// "alpha" is the P/N convenience that rewrites n_patterns.
inline void apply_param(GameConfig& cfg, const std::string& path, const std::string& value) {
    const auto num = [&] { return detail::parse_double(value, path); };
    if (path == "n_agents") {
        const int old_n = cfg.n_agents;
        cfg.n_agents = static_cast<int>(detail::parse_long(value, path));
        // A scaled-linear divisor bound to the old N follows the new one.
        if (auto* p = std::get_if<ScaledLinearPrice>(&cfg.price.variant()))
            if (p->divisor == static_cast<double>(old_n))
                p->divisor = static_cast<double>(cfg.n_agents);
    } else if (path == "n_patterns") {
        cfg.n_patterns = static_cast<int>(detail::parse_long(value, path));
    } else if (path == "n_strategies") {
        cfg.n_strategies = static_cast<int>(detail::parse_long(value, path));
    } else if (path == "alpha") {
        cfg.n_patterns = std::max(1, static_cast<int>(std::lround(num() * cfg.n_agents)));
    } else if (path == "intraday_price") {
        cfg.intraday_price = num();
    } else if (path == "strategy_bias") {
        if (value == "auto") {
            const AStarResult a = solve_a_star(cfg.price, cfg.intraday_price, cfg.noise.mean);
            cfg.strategy_bias = bias_from_equilibrium(a.value, cfg.weights().total());
        } else {
            cfg.strategy_bias = num();
        }
    } else if (path == "noise.sigma") {
        cfg.noise = NoiseSpec::gaussian(num(), cfg.noise.mean);
    } else if (path == "noise.mean") {
        cfg.noise.mean = num();
    } else if (path == "risk_aversion") {
        const RiskAversion ra = detail::parse_risk_token(value);
        if (ra.never_gates())
            cfg.risk_aversion.clear();
        else
            cfg.risk_aversion.assign(static_cast<std::size_t>(cfg.n_agents), ra);
    } else if (path == "price.c") {
        auto* p = std::get_if<ScaledLinearPrice>(&cfg.price.variant());
        if (!p) throw ConfigError("apply_param: price.c requires a scaled_linear price");
        p->c = num();
    } else if (path == "price.c1") {
        auto* p = std::get_if<AffinePrice>(&cfg.price.variant());
        if (!p) throw ConfigError("apply_param: price.c1 requires an affine price");
        p->slope = num();
    } else if (path == "price.c2") {
        auto* p = std::get_if<QuadraticPrice>(&cfg.price.variant());
        if (!p) throw ConfigError("apply_param: price.c2 requires a quadratic price");
        p->c2 = num();
    } else if (path == "price.i_avg") {
        auto* p = std::get_if<CutoffPrice>(&cfg.price.variant());
        if (!p) throw ConfigError("apply_param: price.i_avg requires a cutoff price");
        p->i_avg = num();
    } else if (path == "price.factor") {
        auto* p = std::get_if<CutoffPrice>(&cfg.price.variant());
        if (!p) throw ConfigError("apply_param: price.factor requires a cutoff price");
        p->factor = num();
    } else if (path == "max_steps") {
        cfg.max_steps = detail::parse_long(value, path);
    } else if (path == "convergence_tol") {
        cfg.convergence_tol = num();
    } else if (path == "eval_uses_noise") {
        cfg.eval_uses_noise = detail::parse_bool(value, path);
    } else {
        throw ConfigError(
            "apply_param: unknown parameter '" + path +
            "' (known: n_agents n_patterns n_strategies alpha intraday_price strategy_bias "
            "noise.sigma noise.mean risk_aversion price.c price.c1 price.c2 price.i_avg "
            "price.factor max_steps convergence_tol eval_uses_noise)");
    }
}

// ---- Sweeps -----------------------------------------------------------------------

struct SweepAxis {
    std::string param;
    std::vector<std::string> values;
};

struct SweepSpec {
    GameConfig base;
    std::vector<SweepAxis> axes;
    int samples_per_point = 1;
    std::size_t point_cap = 4096;
};

struct SweepPoint {
    std::vector<std::string> axis_values;
    EnsembleResult ensemble;
};

struct SweepResult {
    std::vector<std::string> axis_names;
    std::vector<SweepPoint> points;  // canonical (axis-major) order
    std::uint64_t seed_base = 0;
};

inline std::size_t sweep_point_count(const SweepSpec& spec) {
    std::size_t n = 1;
    for (const auto& axis : spec.axes) {
        if (axis.values.empty()) throw ConfigError("sweep: axis '" + axis.param + "' has no values");
        n *= axis.values.size();
    }
    return n;
}

/// Run every grid point as an ensemble of samples_per_point runs. Jobs are
/// scheduled on a worker pool but stored by (point, sample) index, so output
/// is identical for any worker count. Points follow axis-major order.
inline SweepResult run_sweep(const SweepSpec& spec, std::uint64_t seed_base, int workers = 0) {
    const std::size_t n_points = sweep_point_count(spec);
    if (n_points > spec.point_cap)
        throw ConfigError("sweep: grid has " + std::to_string(n_points) +
                          " points, above the cap of " + std::to_string(spec.point_cap));
    if (spec.samples_per_point < 1)
        throw ConfigError("sweep: samples_per_point must be >= 1");

    SweepResult out;
    out.seed_base = seed_base;
    for (const auto& axis : spec.axes) out.axis_names.push_back(axis.param);

    // Materialize configs in canonical order; this also validates every point.
    std::vector<GameConfig> cfgs(n_points);
    std::vector<std::vector<std::string>> values(n_points);
    for (std::size_t idx = 0; idx < n_points; ++idx) {
        GameConfig cfg = spec.base;
        std::vector<std::string> vals;
        std::size_t rem = idx;
        for (std::size_t a_rev = 0; a_rev < spec.axes.size(); ++a_rev) {
            const auto& axis = spec.axes[spec.axes.size() - 1 - a_rev];
            vals.insert(vals.begin(), axis.values[rem % axis.values.size()]);
            rem /= axis.values.size();
        }
        for (std::size_t a = 0; a < spec.axes.size(); ++a)
            apply_param(cfg, spec.axes[a].param, vals[a]);
        cfg.validate();
        cfgs[idx] = std::move(cfg);
        values[idx] = std::move(vals);
    }

    const int samples = spec.samples_per_point;
    std::vector<std::vector<RunResult>> runs(n_points);
    for (auto& r : runs) r.resize(static_cast<std::size_t>(samples));

    const std::size_t n_jobs = n_points * static_cast<std::size_t>(samples);
    auto run_job = [&](std::size_t job) {
        const std::size_t point = job / static_cast<std::size_t>(samples);
        const int sample = static_cast<int>(job % static_cast<std::size_t>(samples));
        GameConfig cfg = cfgs[point];
        const std::uint64_t point_seed = derive_seed(seed_base, Stream::sweep, point);
        cfg.seed = derive_seed(point_seed, Stream::ensemble, static_cast<std::uint64_t>(sample));
        runs[point][static_cast<std::size_t>(sample)] = run_until_converged(cfg);
    };

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(n_jobs)));
    if (n_workers == 1) {
        for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1))
                    run_job(j);
            });
        for (auto& th : pool) th.join();
    }

    out.points.resize(n_points);
    for (std::size_t p = 0; p < n_points; ++p) {
        out.points[p].axis_values = values[p];
        out.points[p].ensemble = aggregate_runs(std::move(runs[p]),
                                                derive_seed(seed_base, Stream::sweep, p),
                                                config_hash(cfgs[p]));
    }
    return out;
}

/// CSV emission in canonical order; fixed column set, %.10g numerics.
inline std::string sweep_csv(const SweepResult& sweep) {
    std::string out;
    for (const auto& name : sweep.axis_names) out += name + ",";
    out +=
        "samples,mean_a,mean_a_se,sigma_a,sigma_a_se,sigma_total,sigma_total_se,"
        "excess_kurtosis,active_fraction,converged,exhausted,total_steps\n";
    char buf[64];
    const auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    for (const auto& point : sweep.points) {
        for (const auto& v : point.axis_values) out += v + ",";
        const auto& e = point.ensemble;
        out += std::to_string(e.sample_count) + "," + num(e.mean_a.mean) + "," +
               num(e.mean_a.std_error) + "," + num(e.sigma_a.mean) + "," +
               num(e.sigma_a.std_error) + "," + num(e.sigma_total.mean) + "," +
               num(e.sigma_total.std_error) + "," + num(e.excess_kurtosis.mean) + "," +
               num(e.active_fraction.mean) + "," + std::to_string(e.converged_count) + "," +
               std::to_string(e.exhausted_count) + "," + std::to_string(e.total_steps) + "\n";
    }
    return out;
}

}  // namespace mg
