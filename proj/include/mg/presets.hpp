#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mg/engine.hpp"
#include "mg/equilibrium.hpp"
#include "mg/harness.hpp"
#include "mg/intraday.hpp"
#include "mg/report_io.hpp"

// Named experiment presets. Each preset pins the parameters of one reference
// experiment, runs it at desk scale by default (full-scale parameters behind
// the `full` flag), and emits CSV datasets plus a manifest with the seeds and
// config hashes needed to reproduce the output bit-exactly.

namespace mg {

struct PresetOptions {
    double scale = 1.0;  // shrinks desk-scale N / steps / samples further
    bool full = false;   // full-scale reference parameters (slow; not for CI)
    std::uint64_t seed = 1;
    int workers = 0;
    std::string out_dir = ".";
    std::string ladder_path = "data/sample_merit_ladder.csv";
};

struct PresetOutput {
    std::vector<std::string> files;
    json manifest;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5",
                                                   "fig6", "fig7", "fig8", "fig9",
                                                   "fig10", "appA", "appB", "appC"};
    return names;
}

namespace preset_detail {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline int scaled(int base, double scale, int floor_value) {
    return std::max(floor_value, static_cast<int>(std::lround(base * scale)));
}

inline int pattern_count(double alpha, int n_agents) {
    return std::max(1, static_cast<int>(std::lround(alpha * n_agents)));
}

/// Standard game: unit weights, I = 0, R(A) = A/N, unbiased strategies.
inline GameConfig standard_game(int n_agents, int n_patterns, int n_strategies,
                                long max_steps) {
    GameConfig cfg;
    cfg.n_agents = n_agents;
    cfg.n_patterns = n_patterns;
    cfg.n_strategies = n_strategies;
    cfg.price = PriceSpec::scaled_linear(1.0, static_cast<double>(n_agents));
    cfg.max_steps = max_steps;
    return cfg;
}

/// Biased game with identity price: R(A) = A, so A* = I; strategy bias from
/// the homogeneous equilibrium.
inline GameConfig biased_identity_game(int n_agents, int n_patterns, double intraday,
                                       long max_steps) {
    GameConfig cfg;
    cfg.n_agents = n_agents;
    cfg.n_patterns = n_patterns;
    cfg.n_strategies = 2;
    cfg.intraday_price = intraday;
    cfg.price = PriceSpec::identity();
    cfg.strategy_bias = bias_from_equilibrium(intraday, static_cast<double>(n_agents));
    cfg.max_steps = max_steps;
    return cfg;
}

class Emitter {
public:
    Emitter(std::string preset, const PresetOptions& opt)
        : preset_(std::move(preset)), opt_(opt), t0_(std::chrono::steady_clock::now()) {
        std::filesystem::create_directories(opt_.out_dir);
        manifest_["preset"] = preset_;
        manifest_["scale"] = opt_.scale;
        manifest_["full"] = opt_.full;
        manifest_["seed"] = opt_.seed;
        manifest_["version"] = 1;
        manifest_["configs"] = json::array();
    }

    void dataset(const std::string& suffix, const std::string& content) {
        const std::string path =
            (std::filesystem::path(opt_.out_dir) / (preset_ + "_" + suffix)).string();
        write_text_file(path, content);
        files_.push_back(path);
    }

    void note_config(const std::string& label, const GameConfig& cfg,
                     std::uint64_t seed_base) {
        manifest_["configs"].push_back(
            {{"label", label}, {"hash", config_hash(cfg)}, {"seed_base", seed_base}});
    }

    void add_steps(long steps) { total_steps_ += steps; }
    json& manifest() { return manifest_; }

    PresetOutput finish() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        manifest_["total_steps"] = total_steps_;
        manifest_["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
        json files = json::array();
        for (const auto& f : files_) files.push_back(std::filesystem::path(f).filename().string());
        manifest_["files"] = files;
        const std::string path =
            (std::filesystem::path(opt_.out_dir) / (preset_ + "_manifest.json")).string();
        write_text_file(path, manifest_.dump(2) + "\n");
        files_.push_back(path);
        return PresetOutput{files_, manifest_};
    }

private:
    std::string preset_;
    PresetOptions opt_;
    std::chrono::steady_clock::time_point t0_;
    std::vector<std::string> files_;
    json manifest_;
    long total_steps_ = 0;
};

// fig2: time series and converged histogram of A for the standard game.
inline PresetOutput preset_fig2(const PresetOptions& opt, const char* name = "fig2") {
    Emitter em(name, opt);
    GameConfig cfg = opt.full ? standard_game(4100, 2050, 2, 1'000'000)
                              : standard_game(1025, 512, 2,
                                              std::max(4000L, std::lround(100000 * opt.scale)));
    cfg.convergence_tol = 0.0;  // fixed-length trace run
    cfg.seed = opt.seed;
    em.note_config("trace", cfg, cfg.seed);

    std::vector<double> series;
    series.reserve(static_cast<std::size_t>(cfg.max_steps));
    const RunResult r = run_with_callback(
        cfg, [&](const Game&, const StepOutcome& s) { series.push_back(s.arbitrage); });
    em.add_steps(r.steps_run);

    const bool is_fig3 = std::string(name) == "fig3";
    if (!is_fig3) {
        std::string csv = "t,arbitrage\n";
        for (std::size_t i = 0; i < series.size(); ++i)
            csv += std::to_string(i) + "," + num(series[i]) + "\n";
        em.dataset("series.csv", csv);

        std::string hist = "bin_lo,bin_hi,count,gaussian_expected\n";
        const double total = static_cast<double>(r.hist_a.total());
        for (std::size_t i = 0; i < r.hist_a.counts.size(); ++i) {
            const double lo = r.hist_a.bin_edges[i];
            const double hi = r.hist_a.bin_edges[i + 1];
            const double mid = 0.5 * (lo + hi);
            constexpr double two_pi = 6.28318530717958647692;
            const double z = (mid - r.mean_a) / (r.sigma_a > 0 ? r.sigma_a : 1.0);
            const double dens = std::exp(-0.5 * z * z) /
                                ((r.sigma_a > 0 ? r.sigma_a : 1.0) * std::sqrt(two_pi));
            hist += num(lo) + "," + num(hi) + "," + std::to_string(r.hist_a.counts[i]) + "," +
                    num(dens * (hi - lo) * total) + "\n";
        }
        em.dataset("histogram.csv", hist);
    } else {
        const std::size_t window = 2000;
        const auto sig = running_sigma(series, std::min(window, series.size()));
        std::string csv = "t,running_sigma\n";
        for (std::size_t i = 0; i < sig.size(); ++i)
            csv += std::to_string(i + window - 1) + "," + num(sig[i]) + "\n";
        em.dataset("running_sigma.csv", csv);
        em.manifest()["window"] = window;
    }
    em.manifest()["result"] = to_json(r, false);
    return em.finish();
}

// fig3: running deviation of the same trace run.
inline PresetOutput preset_fig3(const PresetOptions& opt) { return preset_fig2(opt, "fig3"); }

// fig4: scaled fluctuations versus alpha for several strategy counts.
inline PresetOutput preset_fig4(const PresetOptions& opt) {
    Emitter em("fig4", opt);
    const int n = opt.full ? 1025 : scaled(257, opt.scale, 32);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const long steps = opt.full ? 2'000'000 : 200'000;
    const std::vector<double> alphas = {0.0625, 0.125, 0.25, 0.34, 0.5, 1, 2, 4, 8};
    const std::vector<int> strategy_counts = {2, 3, 4, 5};

    std::string csv = "s,alpha,p,n,sigma_a_over_sqrt_n,se,nash_level\n";
    std::size_t point = 0;
    for (int s : strategy_counts) {
        for (double alpha : alphas) {
            GameConfig cfg = standard_game(n, pattern_count(alpha, n), s, steps);
            cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
            const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
            em.add_steps(e.total_steps);
            em.note_config("s=" + std::to_string(s) + ",alpha=" + num(cfg.alpha()), cfg, cfg.seed);
            const double root_n = std::sqrt(static_cast<double>(n));
            csv += std::to_string(s) + "," + num(cfg.alpha()) + "," +
                   std::to_string(cfg.n_patterns) + "," + std::to_string(n) + "," +
                   num(e.sigma_a.mean / root_n) + "," + num(e.sigma_a.std_error / root_n) +
                   ",1\n";
        }
    }
    em.dataset("sigma_vs_alpha.csv", csv);
    return em.finish();
}

// fig5: rescaling of fluctuations for different intraday prices.
inline PresetOutput preset_fig5(const PresetOptions& opt) {
    Emitter em("fig5", opt);
    const int n = opt.full ? 1025 : scaled(513, opt.scale, 64);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const std::vector<double> i_fracs = {0.0, 0.25, 0.5, 0.75};
    const std::vector<double> alphas = {1, 2, 4};

    std::string csv = "i,alpha,sigma_a,se,collapse\n";
    std::size_t point = 0;
    for (double frac : i_fracs) {
        const double intraday = frac * n;
        for (double alpha : alphas) {
            GameConfig cfg = biased_identity_game(n, pattern_count(alpha, n), intraday,
                                                  opt.full ? 2'000'000 : 200'000);
            cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
            const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
            em.add_steps(e.total_steps);
            em.note_config("i=" + num(intraday) + ",alpha=" + num(cfg.alpha()), cfg, cfg.seed);
            const double norm = std::sqrt(static_cast<double>(n) * n - intraday * intraday);
            csv += num(intraday) + "," + num(cfg.alpha()) + "," + num(e.sigma_a.mean) + "," +
                   num(e.sigma_a.std_error) + "," + num(e.sigma_a.mean * std::sqrt(n) / norm) +
                   "\n";
        }
    }
    em.dataset("collapse.csv", csv);
    return em.finish();
}

// fig6: additivity of arbitrage and noise variances under a linear price.
inline PresetOutput preset_fig6(const PresetOptions& opt) {
    Emitter em("fig6", opt);
    const int n = opt.full ? 1025 : scaled(257, opt.scale, 32);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const std::vector<double> alphas = {0.5, 2};
    const std::vector<double> sigmas = {10, 50, 100};

    std::string csv = "alpha,sigma_eta,sigma_a,sigma_total_measured,sigma_total_predicted\n";
    std::size_t point = 0;
    for (double alpha : alphas) {
        for (double sigma_eta : sigmas) {
            GameConfig cfg;
            cfg.n_agents = n;
            cfg.n_patterns = pattern_count(alpha, n);
            cfg.price = PriceSpec::identity();
            cfg.noise = NoiseSpec::gaussian(sigma_eta);
            cfg.max_steps = opt.full ? 2'000'000 : 200'000;
            cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
            const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
            em.add_steps(e.total_steps);
            em.note_config("alpha=" + num(cfg.alpha()) + ",sigma_eta=" + num(sigma_eta), cfg,
                           cfg.seed);
            const double predicted =
                std::sqrt(e.sigma_a.mean * e.sigma_a.mean + sigma_eta * sigma_eta);
            csv += num(cfg.alpha()) + "," + num(sigma_eta) + "," + num(e.sigma_a.mean) + "," +
                   num(e.sigma_total.mean) + "," + num(predicted) + "\n";
        }
    }
    em.dataset("noise_additivity.csv", csv);
    return em.finish();
}

// fig7: expected arbitrage versus homogeneous risk aversion.
inline PresetOutput preset_fig7(const PresetOptions& opt) {
    Emitter em("fig7", opt);
    const int n = opt.full ? 2000 : scaled(500, opt.scale, 50);
    const double intraday = n / 4.0;
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const std::vector<double> alphas = {0.02, 0.1, 0.5};
    const std::vector<double> eps_grid = {-std::numeric_limits<double>::infinity(), 0, 0.5, 1, 2};

    std::string csv = "alpha,epsilon,mean_a,se,sigma_a,active_fraction\n";
    std::size_t point = 0;
    for (double alpha : alphas) {
        for (double eps : eps_grid) {
            GameConfig cfg = biased_identity_game(n, pattern_count(alpha, n), intraday,
                                                  opt.full ? 2'000'000 : 200'000);
            if (std::isfinite(eps))
                cfg.risk_aversion.assign(static_cast<std::size_t>(n),
                                         RiskAversion::threshold(eps));
            cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
            const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
            em.add_steps(e.total_steps);
            em.note_config("alpha=" + num(cfg.alpha()) +
                               ",eps=" + (std::isfinite(eps) ? num(eps) : "-inf"),
                           cfg, cfg.seed);
            csv += num(cfg.alpha()) + "," + (std::isfinite(eps) ? num(eps) : "-inf") + "," +
                   num(e.mean_a.mean) + "," + num(e.mean_a.std_error) + "," +
                   num(e.sigma_a.mean) + "," + num(e.active_fraction.mean) + "\n";
        }
    }
    em.dataset("mean_a_vs_epsilon.csv", csv);
    return em.finish();
}

// fig8: quadratic price, expected arbitrage versus noise strength and c2.
inline PresetOutput preset_fig8(const PresetOptions& opt) {
    Emitter em("fig8", opt);
    const int n = opt.full ? 1025 : scaled(513, opt.scale, 64);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const std::vector<double> alphas = {0.1, 1};
    const std::vector<double> sigmas = {0, 25, 50, 100};
    const std::vector<double> c2s = {1.0 / 2000, 1.0 / 1000, 1.0 / 500, 1.0 / 250};

    std::string csv = "panel,alpha,sigma_eta,c2,mean_a,se,sigma_a,sigma_total\n";
    std::size_t point = 0;
    auto run_point = [&](const char* panel, double alpha, double sigma_eta, double c2) {
        GameConfig cfg;
        cfg.n_agents = n;
        cfg.n_patterns = pattern_count(alpha, n);
        cfg.price = PriceSpec::quadratic(c2);
        if (sigma_eta > 0) cfg.noise = NoiseSpec::gaussian(sigma_eta);
        cfg.max_steps = opt.full ? 2'000'000 : 200'000;
        cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
        const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
        em.add_steps(e.total_steps);
        em.note_config(std::string(panel) + ",alpha=" + num(cfg.alpha()) + ",sigma_eta=" +
                           num(sigma_eta) + ",c2=" + num(c2),
                       cfg, cfg.seed);
        csv += std::string(panel) + "," + num(cfg.alpha()) + "," + num(sigma_eta) + "," +
               num(c2) + "," + num(e.mean_a.mean) + "," + num(e.mean_a.std_error) + "," +
               num(e.sigma_a.mean) + "," + num(e.sigma_total.mean) + "\n";
    };
    for (double alpha : alphas)
        for (double s : sigmas) run_point("noise", alpha, s, 1.0 / 500);
    for (double alpha : alphas)
        for (double c2 : c2s) run_point("c2", alpha, 50, c2);
    em.dataset("mean_a_quadratic.csv", csv);
    return em.finish();
}

// fig9: fluctuations under risk aversion; constant-P transition across N.
inline PresetOutput preset_fig9(const PresetOptions& opt) {
    Emitter em("fig9", opt);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const long steps = opt.full ? 2'000'000 : 200'000;

    std::string csv = "panel,n,i,epsilon,alpha,p,sigma_a,se\n";
    std::size_t point = 0;
    auto run_point = [&](const char* panel, int n, double eps, int p) {
        GameConfig cfg = biased_identity_game(n, p, n / 4.0, steps);
        if (std::isfinite(eps))
            cfg.risk_aversion.assign(static_cast<std::size_t>(n), RiskAversion::threshold(eps));
        cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
        const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
        em.add_steps(e.total_steps);
        em.note_config(std::string(panel) + ",n=" + std::to_string(n) + ",p=" +
                           std::to_string(p) + ",eps=" + (std::isfinite(eps) ? num(eps) : "-inf"),
                       cfg, cfg.seed);
        csv += std::string(panel) + "," + std::to_string(n) + "," + num(n / 4.0) + "," +
               (std::isfinite(eps) ? num(eps) : "-inf") + "," + num(cfg.alpha()) + "," +
               std::to_string(p) + "," + num(e.sigma_a.mean) + "," + num(e.sigma_a.std_error) +
               "\n";
    };

    const int n_a = opt.full ? 2000 : scaled(500, opt.scale, 50);
    const std::vector<double> eps_grid = {-std::numeric_limits<double>::infinity(), 0, 0.5, 1};
    const std::vector<double> alphas = {0.02, 0.04, 0.1, 0.2, 0.5, 1, 2, 4};
    for (double eps : eps_grid)
        for (double alpha : alphas) run_point("a", n_a, eps, pattern_count(alpha, n_a));

    const std::vector<int> n_grid = opt.full ? std::vector<int>{500, 1000, 2000}
                                             : std::vector<int>{scaled(250, opt.scale, 50),
                                                                scaled(500, opt.scale, 100)};
    const std::vector<int> p_grid = {6, 10, 14, 20, 28, 40, 80};
    for (int n : n_grid)
        for (int p : p_grid) run_point("b", n, 1.0, p);

    em.dataset("sigma_risk_aversion.csv", csv);
    return em.finish();
}

// fig10: heterogeneous risk aversion across the high/low weight split.
inline PresetOutput preset_fig10(const PresetOptions& opt) {
    Emitter em("fig10", opt);
    const int samples = opt.full ? 100 : std::max(2, static_cast<int>(std::lround(10 * opt.scale)));
    const std::vector<double> eps_grid = {0.25, 0.5, 1, 2};

    GameConfig base;
    base.n_agents = kRealisticAgentCount;
    base.n_patterns = 120;
    base.intraday_price = 50;
    base.weight_spec = RealisticWeights{};
    base.price = PriceSpec::identity();
    base.max_steps = opt.full ? 2'000'000 : 200'000;
    const WeightVector w = base.weights();
    base.strategy_bias = bias_from_equilibrium(50.0, w.total());

    const WeightSplit split = split_by_weight(w);
    em.manifest()["split"] = {{"high_agents", split.high_group.size()},
                              {"high_weight", split.high_weight},
                              {"low_weight", split.low_weight},
                              {"achieved_ratio", split.achieved_ratio}};

    std::string csv = "scenario,epsilon,sigma_a,se,mean_a,active_fraction\n";
    std::size_t point = 0;
    auto run_scenario = [&](const std::string& scenario, double eps) {
        GameConfig cfg = base;
        const auto zero = RiskAversion::threshold(0.0);
        const auto averse = RiskAversion::threshold(eps);
        if (scenario == "all_zero")
            cfg.risk_aversion.assign(w.size(), zero);
        else if (scenario == "high_averse")
            cfg.risk_aversion = grouped_risk_aversion(w, averse, zero);
        else
            cfg.risk_aversion = grouped_risk_aversion(w, zero, averse);
        cfg.seed = derive_seed(opt.seed, Stream::sweep, point++);
        const EnsembleResult e = run_ensemble(cfg, samples, cfg.seed, opt.workers);
        em.add_steps(e.total_steps);
        em.note_config(scenario + ",eps=" + num(eps), cfg, cfg.seed);
        csv += scenario + "," + num(eps) + "," + num(e.sigma_a.mean) + "," +
               num(e.sigma_a.std_error) + "," + num(e.mean_a.mean) + "," +
               num(e.active_fraction.mean) + "\n";
    };
    for (double eps : eps_grid) {
        run_scenario("high_averse", eps);
        run_scenario("all_zero", eps);
        run_scenario("low_averse", eps);
    }
    em.dataset("hetero_epsilon.csv", csv);
    return em.finish();
}

// appA: analytic report for the realistic weight table.
inline PresetOutput preset_appA(const PresetOptions& opt) {
    Emitter em("appA", opt);
    const WeightVector w{realistic_weight_table()};
    const Heterogeneity het = w.heterogeneity();
    const WeightSplit split = split_by_weight(w);
    json j;
    j["w_total_mw"] = w.total();
    j["x"] = het.x;
    j["effective_agents"] = het.effective_agents;
    j["sigma_over_mean_at_sqrt5"] = fluctuation_to_mean(w);
    j["split"] = {{"high_agents", split.high_group.size()},
                  {"low_agents", split.low_group.size()},
                  {"high_weight", split.high_weight},
                  {"low_weight", split.low_weight},
                  {"achieved_ratio", split.achieved_ratio}};
    em.dataset("report.json", j.dump(2) + "\n");
    return em.finish();
}

// appB: derivative and curvature analysis of the sample merit ladder.
inline PresetOutput preset_appB(const PresetOptions& opt) {
    Emitter em("appB", opt);
    const MeritLadder ladder = MeritLadder::from_csv(opt.ladder_path);
    const double h = default_fd_step(ladder);
    std::string csv = "x,r,p,dr,d2r,condition_holds\n";
    const auto emit_side = [&](double capacity, double sign) {
        const int points = 41;
        for (int k = 1; k < points; ++k) {
            const double x = sign * capacity * (k + 0.5) / (points + 1);
            if (std::abs(x) <= 2 * h || std::abs(x) + 2 * h >= capacity) continue;
            const DerivativeCheck d = derivative_check(ladder, x, h);
            csv += num(x) + "," + num(ladder.average_price(x)) + "," +
                   num(ladder.marginal_price(x)) + "," + num(d.dR) + "," + num(d.d2R) + "," +
                   (d.convexity_condition_holds ? "true" : "false") + "\n";
        }
    };
    emit_side(ladder.positive_capacity(), +1.0);
    emit_side(ladder.negative_capacity(), -1.0);
    em.dataset("derivatives.csv", csv);
    em.manifest()["fd_step"] = h;
    return em.finish();
}

// appC: broadening of the imbalance distribution under curved prices.
inline PresetOutput preset_appC(const PresetOptions& opt) {
    Emitter em("appC", opt);
    const std::vector<double> widths = {5, 10, 20, 40};
    std::string csv = "price,width,expected_r,closed_form\n";

    const double intraday = 100.0;
    {
        const PriceSpec affine = PriceSpec::affine(intraday, 1.0, intraday);
        const auto rows = broadening_expectation(affine, intraday, widths,
                                                 BroadeningDist::gaussian);
        for (const auto& [w, er] : rows)
            csv += "affine," + num(w) + "," + num(er) + "," + num(intraday) + "\n";
    }
    for (double c2 : {1.0 / 500, -1.0 / 500}) {
        const PriceSpec quad = PriceSpec::quadratic(c2);
        const double a_star = solve_a_star(quad, intraday).value;
        const auto rows = broadening_expectation(quad, a_star, widths, BroadeningDist::gaussian);
        for (const auto& [w, er] : rows)
            csv += std::string(c2 > 0 ? "quadratic_pos," : "quadratic_neg,") + num(w) + "," +
                   num(er) + "," + num(eval_price(quad, a_star) + c2 * w * w) + "\n";
    }
    {
        // Cut-off wrapped affine with A* exactly at the kink: flat left, rising right.
        const double a_star = intraday;
        const double i_avg = intraday / 1.25;
        const PriceSpec wrapped =
            PriceSpec::cutoff(PriceSpec::affine(intraday, 1.0, a_star), i_avg, 1.25);
        const auto rows = broadening_expectation(wrapped, a_star, widths,
                                                 BroadeningDist::gaussian);
        for (const auto& [w, er] : rows)
            csv += "cutoff_at_kink," + num(w) + "," + num(er) + ",\n";
    }
    em.dataset("broadening.csv", csv);
    return em.finish();
}

}  // namespace preset_detail

inline PresetOutput run_preset(const std::string& name, const PresetOptions& opt) {
    using namespace preset_detail;
    if (name == "fig2") return preset_fig2(opt);
    if (name == "fig3") return preset_fig3(opt);
    if (name == "fig4") return preset_fig4(opt);
    if (name == "fig5") return preset_fig5(opt);
    if (name == "fig6") return preset_fig6(opt);
    if (name == "fig7") return preset_fig7(opt);
    if (name == "fig8") return preset_fig8(opt);
    if (name == "fig9") return preset_fig9(opt);
    if (name == "fig10") return preset_fig10(opt);
    if (name == "appA") return preset_appA(opt);
    if (name == "appB") return preset_appB(opt);
    if (name == "appC") return preset_appC(opt);
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; available: " + known);
}

}  // namespace mg
