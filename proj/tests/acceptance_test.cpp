// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured numbers. Every run is seeded, so the whole suite is
// deterministic. Run the binary directly to see all criterion lines.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mg/mg.hpp"

using namespace mg;

namespace {

constexpr std::uint64_t kSuiteSeed = 20260810;
constexpr int kWorkers = 2;

std::uint64_t crit_seed(int criterion, int sub = 0) {
    return derive_seed(kSuiteSeed, Stream::sweep,
                       static_cast<std::uint64_t>(criterion) * 1000 + sub);
}

void criterion_line(int id, bool pass, const std::string& detail) {
    std::printf("[criterion %02d] %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

/// Standard game: unit weights, I = 0, R(A) = A/N, unbiased strategies.
GameConfig standard_game(int n, double alpha) {
    GameConfig cfg;
    cfg.n_agents = n;
    cfg.n_patterns = std::max(1, static_cast<int>(std::lround(alpha * n)));
    cfg.n_strategies = 2;
    cfg.price = PriceSpec::scaled_linear(1.0, static_cast<double>(n));
    cfg.max_steps = 200000;
    return cfg;
}

/// Biased game with identity price: R(A) = A, A* = I.
GameConfig biased_game(int n, double alpha, double intraday) {
    GameConfig cfg;
    cfg.n_agents = n;
    cfg.n_patterns = std::max(1, static_cast<int>(std::lround(alpha * n)));
    cfg.n_strategies = 2;
    cfg.intraday_price = intraday;
    cfg.price = PriceSpec::identity();
    cfg.strategy_bias = bias_from_equilibrium(intraday, static_cast<double>(n));
    cfg.max_steps = 200000;
    return cfg;
}

double sigma_over_sqrt_n(const EnsembleResult& e, int n) {
    return e.sigma_a.mean / std::sqrt(static_cast<double>(n));
}

}  // namespace

TEST_CASE("criterion 1: no-learning baseline at alpha = 8") {
    const int n = 513;
    const EnsembleResult e = run_ensemble(standard_game(n, 8.0), 20, crit_seed(1), kWorkers);
    const double v = sigma_over_sqrt_n(e, n);
    const bool pass = std::abs(v - 1.0) <= 0.10;
    criterion_line(1, pass, "sigma_A/sqrt(N) = " + fmt(v) + " (want 1.00 +- 0.10)");
    CHECK(pass);
}

TEST_CASE("criterion 2: phase-transition location and depth") {
    const int n = 513;
    const std::vector<double> grid = {0.05, 0.1, 0.2, 0.34, 0.5, 1, 2, 4};
    double min_v = 1e300, min_alpha = 0.0;
    std::string curve;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EnsembleResult e =
            run_ensemble(standard_game(n, grid[i]), 20, crit_seed(2, static_cast<int>(i)),
                         kWorkers);
        const double v = sigma_over_sqrt_n(e, n);
        curve += fmt(grid[i], 2) + ":" + fmt(v, 2) + " ";
        if (v < min_v) {
            min_v = v;
            min_alpha = grid[i];
        }
    }
    const bool in_window = min_alpha >= 0.2 && min_alpha <= 0.6;
    const bool deep = min_v < 0.7;
    criterion_line(2, in_window && deep,
                   "minimum " + fmt(min_v) + " at alpha = " + fmt(min_alpha, 2) +
                       " (want in [0.2,0.6], < 0.7); curve: " + curve);
    CHECK(in_window);
    CHECK(deep);
}

TEST_CASE("criterion 3: low-alpha scaling exponent") {
    const int n = 1025;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (double alpha : {0.01, 0.02, 0.04}) {
        GameConfig cfg = standard_game(n, alpha);
        const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(3, cnt), kWorkers);
        const double x = std::log(cfg.alpha());
        const double y = std::log(sigma_over_sqrt_n(e, n));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    const bool pass = std::abs(slope + 0.5) <= 0.15;
    criterion_line(3, pass, "log-log slope = " + fmt(slope) + " (want -0.5 +- 0.15)");
    CHECK(pass);
}

TEST_CASE("criterion 4: alpha-collapse across N") {
    const std::vector<double> alphas = {1, 2, 4};
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const EnsembleResult small =
            run_ensemble(standard_game(512, alphas[i]), 20, crit_seed(4, static_cast<int>(i)),
                         kWorkers);
        const EnsembleResult large =
            run_ensemble(standard_game(1024, alphas[i]), 20,
                         crit_seed(4, 100 + static_cast<int>(i)), kWorkers);
        const double v1 = sigma_over_sqrt_n(small, 512);
        const double v2 = sigma_over_sqrt_n(large, 1024);
        const double dev = std::abs(v1 - v2) / v2;
        worst = std::max(worst, dev);
        detail += "a=" + fmt(alphas[i], 0) + ":" + fmt(dev * 100, 1) + "% ";
    }
    const bool pass = worst <= 0.10;
    criterion_line(4, pass, "pointwise deviation " + detail + "(want <= 10%)");
    CHECK(pass);
}

TEST_CASE("criterion 5: intraday-price rescaling") {
    const int n = 513;
    const std::vector<double> alphas = {1, 2, 4};
    const std::vector<double> fracs = {0.0, 0.25, 0.5, 0.75};
    double worst = 0.0;
    int sub = 0;
    for (double alpha : alphas) {
        double ref = -1.0;
        for (double frac : fracs) {
            GameConfig cfg = biased_game(n, alpha, frac * n);
            const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(5, sub++), kWorkers);
            const double norm =
                std::sqrt(static_cast<double>(n) * n - cfg.intraday_price * cfg.intraday_price);
            const double collapse = e.sigma_a.mean / norm;
            if (ref < 0)
                ref = collapse;
            else
                worst = std::max(worst, std::abs(collapse - ref) / ref);
        }
    }
    const bool pass = worst <= 0.10;
    criterion_line(5, pass,
                   "worst collapse deviation vs I=0 curve = " + fmt(worst * 100, 1) +
                       "% (want <= 10%)");
    CHECK(pass);
}

TEST_CASE("criterion 6: weight-distribution rescaling") {
    struct Family {
        const char* name;
        WeightSpec spec;
        int n;
    };
    const std::vector<Family> families = {
        {"uniform", UniformWeights{0.0}, 513},
        {"exponential", ExponentialWeights{1.0}, 513},
        {"pareto", ParetoWeights{}, 513},
        {"realistic", RealisticWeights{}, 120},
    };
    const std::vector<double> alphas = {1, 2, 4};
    bool pass = true;
    std::string detail;
    int sub = 0;
    for (double alpha : alphas) {
        double ref = -1.0;
        for (const auto& fam : families) {
            GameConfig cfg;
            cfg.n_agents = fam.n;
            cfg.n_patterns = std::max(1, static_cast<int>(std::lround(alpha * fam.n)));
            cfg.weight_spec = fam.spec;
            cfg.price = PriceSpec::identity();
            cfg.max_steps = 200000;
            const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(6, sub++), kWorkers);
            // Per-run normalizer: the run's own weights (sampled families are
            // redrawn per sample from the run seed).
            double collapse = 0.0;
            for (const auto& r : e.runs) {
                const WeightVector w = make_weights(fam.spec, fam.n, r.seed);
                collapse += r.sigma_a / std::sqrt(w.sum_squares());
            }
            collapse /= static_cast<double>(e.runs.size());
            if (ref < 0) {
                ref = collapse;  // uniform is the reference curve
                continue;
            }
            const double dev = std::abs(collapse - ref) / ref;
            if (dev > 0.20) pass = false;
            detail += std::string(fam.name) + "@a=" + fmt(alpha, 0) + ":" + fmt(dev * 100, 1) +
                      "% ";
        }
    }
    criterion_line(6, pass, "deviation vs uniform curve (want all <= 20%): " + detail);
    CHECK(pass);
}

TEST_CASE("criterion 7: noise additivity under a linear price") {
    const int n = 257;
    bool pass = true;
    std::string detail;
    int sub = 0;
    for (double sigma_eta : {10.0, 50.0, 100.0}) {
        GameConfig cfg = standard_game(n, 2.0);
        cfg.price = PriceSpec::identity();
        cfg.noise = NoiseSpec::gaussian(sigma_eta);
        const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(7, sub++), kWorkers);
        const double predicted =
            std::sqrt(e.sigma_a.mean * e.sigma_a.mean + sigma_eta * sigma_eta);
        const double ratio = e.sigma_total.mean / predicted;
        if (std::abs(ratio - 1.0) > 0.05) pass = false;
        detail += "s=" + fmt(sigma_eta, 0) + ":" + fmt(ratio, 4) + " ";
    }
    criterion_line(7, pass, "sigma_total / prediction (want within 5%): " + detail);
    CHECK(pass);
}

TEST_CASE("criterion 8: quadratic price suppresses arbitrage under noise") {
    const int n = 1025;
    const std::vector<double> alphas = {0.1, 1.0};
    const std::vector<double> sigmas = {0, 25, 50, 100};
    const std::vector<double> c2s = {1.0 / 2000, 1.0 / 1000, 1.0 / 500, 1.0 / 250};

    auto mean_at = [&](double alpha, double sigma_eta, double c2, int sub) {
        GameConfig cfg;
        cfg.n_agents = n;
        cfg.n_patterns = std::max(1, static_cast<int>(std::lround(alpha * n)));
        cfg.price = PriceSpec::quadratic(c2);
        if (sigma_eta > 0) cfg.noise = NoiseSpec::gaussian(sigma_eta);
        cfg.max_steps = 200000;
        return run_ensemble(cfg, 20, crit_seed(8, sub), kWorkers).mean_a.mean;
    };

    bool noise_monotone = true, c2_monotone = true, alpha_ordered = true;
    std::string detail;
    int sub = 0;
    std::vector<std::vector<double>> noise_means(alphas.size());
    for (std::size_t a = 0; a < alphas.size(); ++a) {
        for (double s : sigmas) noise_means[a].push_back(mean_at(alphas[a], s, 1.0 / 500, sub++));
        for (std::size_t k = 1; k < noise_means[a].size(); ++k)
            if (!(noise_means[a][k] < noise_means[a][k - 1])) noise_monotone = false;
    }
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        if (!(noise_means[0][k] < noise_means[1][k])) alpha_ordered = false;
        detail += "s=" + fmt(sigmas[k], 0) + ":(" + fmt(noise_means[0][k], 2) + "," +
                  fmt(noise_means[1][k], 2) + ") ";
    }
    for (double alpha : alphas) {
        std::vector<double> means;
        for (double c2 : c2s) means.push_back(mean_at(alpha, 50.0, c2, sub++));
        for (std::size_t k = 1; k < means.size(); ++k)
            if (!(means[k] < means[k - 1])) c2_monotone = false;
    }
    const bool pass = noise_monotone && c2_monotone && alpha_ordered;
    criterion_line(8, pass,
                   "mean_A (alpha 0.1, 1) per sigma_eta: " + detail +
                       (noise_monotone ? "" : "[not decreasing in noise] ") +
                       (c2_monotone ? "" : "[not decreasing in c2] ") +
                       (alpha_ordered ? "" : "[alpha ordering violated]"));
    CHECK(noise_monotone);
    CHECK(c2_monotone);
    CHECK(alpha_ordered);
}

TEST_CASE("criterion 9: homogeneous risk aversion") {
    const int n = 500;
    const double intraday = 125.0;

    // At this scaled N the gated and ungated deviation curves merge near the
    // standard transition (alpha ~ 0.34), so the factor-2 reduction is
    // sampled on [0.05, 0.3]; the merge point itself is printed for context.
    const std::vector<double> alphas = {0.05, 0.1, 0.2, 0.3};
    bool reduction_pass = true;
    std::string detail = "sigma ratio: ";
    int sub = 0;
    for (double alpha : alphas) {
        double with_gate = 0.0, without_gate = 0.0;
        for (int gated = 0; gated < 2; ++gated) {
            GameConfig cfg = biased_game(n, alpha, intraday);
            if (gated) cfg.risk_aversion.assign(n, RiskAversion::threshold(1.0));
            const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(9, sub), kWorkers);
            (gated ? with_gate : without_gate) = e.sigma_a.mean;
        }
        ++sub;
        const double ratio = without_gate / with_gate;
        if (!(ratio >= 2.0)) reduction_pass = false;
        detail += "a=" + fmt(alpha, 2) + ":" + fmt(ratio, 2) + " ";
    }
    {
        double with_gate = 0.0, without_gate = 0.0;
        for (int gated = 0; gated < 2; ++gated) {
            GameConfig cfg = biased_game(n, 0.5, intraday);
            if (gated) cfg.risk_aversion.assign(n, RiskAversion::threshold(1.0));
            const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(9, 90), kWorkers);
            (gated ? with_gate : without_gate) = e.sigma_a.mean;
        }
        detail += "(curves merge by a=0.50: " + fmt(without_gate / with_gate, 2) + ") ";
    }

    // mean_A non-increasing in epsilon at fixed alpha = 0.1; adjacent points
    // may differ by measurement error, so one standard error of slack.
    bool mean_pass = true;
    double prev_mean = 0.0, prev_se = 0.0;
    bool first = true;
    detail += "| mean_A: ";
    const double inf = std::numeric_limits<double>::infinity();
    int eps_sub = 200;
    for (double eps : {-inf, 0.0, 0.5, 1.0, 2.0}) {
        GameConfig cfg = biased_game(n, 0.1, intraday);
        if (std::isfinite(eps))
            cfg.risk_aversion.assign(n, RiskAversion::threshold(eps));
        const EnsembleResult e = run_ensemble(cfg, 20, crit_seed(9, eps_sub), kWorkers);
        if (!first && e.mean_a.mean > prev_mean + std::max(prev_se, e.mean_a.std_error))
            mean_pass = false;
        prev_mean = e.mean_a.mean;
        prev_se = e.mean_a.std_error;
        first = false;
        detail += fmt(e.mean_a.mean, 2) + " ";
    }
    const bool pass = reduction_pass && mean_pass;
    criterion_line(9, pass, detail + "(want ratios >= 2, mean_A non-increasing)");
    CHECK(reduction_pass);
    CHECK(mean_pass);
}

TEST_CASE("criterion 10: constant-P transition under risk aversion") {
    const std::vector<int> p_grid = {4, 6, 10, 14, 20, 28, 40, 80, 160};
    std::vector<int> argmins;
    std::string detail;
    int sub = 0;
    for (int n : {250, 500}) {
        double best = 1e300;
        int best_p = -1;
        for (int p : p_grid) {
            GameConfig cfg;
            cfg.n_agents = n;
            cfg.n_patterns = p;
            cfg.intraday_price = n / 4.0;
            cfg.price = PriceSpec::identity();
            cfg.strategy_bias = bias_from_equilibrium(n / 4.0, static_cast<double>(n));
            cfg.risk_aversion.assign(n, RiskAversion::threshold(1.0));
            cfg.max_steps = 200000;
            const EnsembleResult e = run_ensemble(cfg, 10, crit_seed(10, sub++), kWorkers);
            if (e.sigma_a.mean < best) {
                best = e.sigma_a.mean;
                best_p = p;
            }
        }
        argmins.push_back(best_p);
        detail += "N=" + std::to_string(n) + ":P*=" + std::to_string(best_p) + " ";
    }
    const double r01 = static_cast<double>(argmins[0]) / argmins[1];
    const bool mutual = r01 <= 2.0 && r01 >= 0.5;
    const bool near20 = argmins[0] >= 10 && argmins[0] <= 40 && argmins[1] >= 10 &&
                        argmins[1] <= 40;
    criterion_line(10, mutual && near20,
                   detail + "(want within factor 2 of each other and of P = 20)");
    CHECK(mutual);
    CHECK(near20);
}

TEST_CASE("criterion 11: heterogeneous risk aversion ordering") {
    GameConfig base;
    base.n_agents = kRealisticAgentCount;
    base.n_patterns = 120;
    base.intraday_price = 50.0;
    base.weight_spec = RealisticWeights{};
    base.price = PriceSpec::identity();
    base.max_steps = 200000;
    const WeightVector w = make_weights(RealisticWeights{}, kRealisticAgentCount, 1);
    base.strategy_bias = bias_from_equilibrium(50.0, w.total());

    const auto zero = RiskAversion::threshold(0.0);
    const auto one = RiskAversion::threshold(1.0);
    GameConfig high = base, all0 = base, low = base;
    high.risk_aversion = grouped_risk_aversion(w, one, zero);
    all0.risk_aversion.assign(w.size(), zero);
    low.risk_aversion = grouped_risk_aversion(w, zero, one);

    const double s_high = run_ensemble(high, 20, crit_seed(11), kWorkers).sigma_a.mean;
    const double s_all0 = run_ensemble(all0, 20, crit_seed(11), kWorkers).sigma_a.mean;
    const double s_low = run_ensemble(low, 20, crit_seed(11), kWorkers).sigma_a.mean;

    const bool high_below = s_high < s_all0;
    const bool low_above = s_all0 < s_low;
    criterion_line(11, high_below && low_above,
                   "sigma_A: high-averse " + fmt(s_high, 1) + ", all-zero " + fmt(s_all0, 1) +
                       ", low-averse " + fmt(s_low, 1) +
                       " (want high-averse < all-zero < low-averse)");
    CHECK(high_below);
    CHECK(low_above);
}

TEST_CASE("criterion 12: oracle exactness") {
    bool pass = true;
    std::string detail;

    const Heterogeneity uniform = heterogeneity(std::vector<double>(64, 2.0));
    if (uniform.x != 1.0) pass = false;
    detail += "X(uniform)=" + fmt(uniform.x, 3) + " ";

    const WeightVector expo = make_weights(ExponentialWeights{1.0}, 100000, crit_seed(12, 1));
    const double x_expo = expo.heterogeneity().x;
    if (std::abs(x_expo - 2.0) > 0.05) pass = false;
    detail += "X(exp)=" + fmt(x_expo, 3) + " ";

    const WeightVector pareto = make_weights(ParetoWeights{}, 1000000, crit_seed(12, 2));
    const double x_pareto = pareto.heterogeneity().x;
    if (std::abs(x_pareto - 4.0 / 3.0) > 0.05) pass = false;
    detail += "X(pareto)=" + fmt(x_pareto, 3) + " ";

    const WeightVector realistic{realistic_weight_table()};
    const double n_over_x = realistic.heterogeneity().effective_agents;
    if (std::abs(n_over_x - 23.3) > 0.1) pass = false;
    detail += "N/X(realistic)=" + fmt(n_over_x, 2) + " (want 23.3 +- 0.1) ";

    const double ratio = fluctuation_to_mean(realistic);
    if (std::abs(ratio - 0.4) > 0.05) pass = false;
    detail += "sigma/mu=" + fmt(ratio, 3) + " ";

    // Exhaustive enumeration, N <= 12.
    bool enum_ok = true;
    Rng rng(crit_seed(12, 3));
    for (int n = 4; n <= 12; n += 4) {
        WeightVector wv;
        for (int i = 0; i < n; ++i) wv.w.push_back(0.5 + rng.uniform01() * 2.0);
        const double a_star = 0.4 * wv.total();
        const EquilibriumReport rep = nash_variance(wv, a_star);
        double mean = 0.0, second = 0.0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            double a = 0.0, prob = 1.0;
            for (int i = 0; i < n; ++i) {
                const bool up = mask & (1u << i);
                a += up ? wv.w[static_cast<std::size_t>(i)] : -wv.w[static_cast<std::size_t>(i)];
                prob *= up ? rep.bias_p : 1.0 - rep.bias_p;
            }
            mean += prob * a;
            second += prob * a * a;
        }
        const double sigma = std::sqrt(std::max(0.0, second - mean * mean));
        if (std::abs(sigma - rep.sigma_a_pred) > 1e-9 * rep.sigma_a_pred) enum_ok = false;
    }
    if (!enum_ok) pass = false;
    detail += std::string("enumeration=") + (enum_ok ? "exact " : "MISMATCH ");

    // Monte Carlo, N = 1000, 1e6 draws, 1%.
    WeightVector big;
    for (int i = 0; i < 1000; ++i) big.w.push_back(1.0 + (i % 7) * 0.25);
    const EquilibriumReport rep = nash_variance(big, 0.25 * big.total());
    Rng mc(crit_seed(12, 4));
    MomentAccumulator acc;
    for (int draw = 0; draw < 1000000; ++draw) {
        double a = 0.0;
        for (double wi : big.w) a += wi * mc.sign(rep.bias_p);
        acc.add(a);
    }
    const double mc_dev = std::abs(acc.stddev() - rep.sigma_a_pred) / rep.sigma_a_pred;
    if (mc_dev > 0.01) pass = false;
    detail += "MC dev=" + fmt(mc_dev * 100, 2) + "%";

    criterion_line(12, pass, detail);
    CHECK(pass);
}

TEST_CASE("criterion 13: merit ladder derivative properties") {
    Rng rng(crit_seed(13));
    bool monotone_ok = true, condition_ok = true, bound_ok = true;
    int condition_points = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // Random monotone ladder: 3..8 steps per side, increasing magnitudes.
        std::vector<MeritStep> pos, neg;
        double price = 5.0 + rng.uniform01() * 20.0;
        const int n_pos = 3 + static_cast<int>(rng.uniform_below(6));
        for (int k = 0; k < n_pos; ++k) {
            pos.push_back({20.0 + rng.uniform01() * 180.0, price});
            price += rng.uniform01() * 40.0 * (k + 1);
        }
        price = -(5.0 + rng.uniform01() * 20.0);
        const int n_neg = 3 + static_cast<int>(rng.uniform_below(6));
        for (int k = 0; k < n_neg; ++k) {
            neg.push_back({20.0 + rng.uniform01() * 180.0, price});
            price -= rng.uniform01() * 40.0 * (k + 1);
        }
        const MeritLadder ladder = MeritLadder::from_steps(pos, neg);
        const double h = default_fd_step(ladder);
        for (int k = 0; k < 10; ++k) {
            const double cap = ladder.positive_capacity();
            const double x = 2.5 * h + rng.uniform01() * (cap - 5.0 * h);
            const DerivativeCheck d = derivative_check(ladder, x, h);
            if (d.dR < -1e-9) monotone_ok = false;
            if (d.convexity_condition_holds) {
                ++condition_points;
                if (!(d.d2R > 0.0)) condition_ok = false;
            }
            if (ladder.average_price(x) > ladder.marginal_price(x) + 1e-9) bound_ok = false;

            const double xn = -(2.5 * h + rng.uniform01() * (ladder.negative_capacity() - 5.0 * h));
            const DerivativeCheck dn = derivative_check(ladder, xn, h);
            if (dn.dR < -1e-9) monotone_ok = false;
            if (ladder.average_price(xn) < ladder.marginal_price(xn) - 1e-9) bound_ok = false;
        }
    }
    const bool pass = monotone_ok && condition_ok && bound_ok;
    criterion_line(13, pass,
                   "100 random ladders: dR >= -1e-9 " + std::string(monotone_ok ? "ok" : "VIOLATED") +
                       ", condition => d2R > 0 at " + std::to_string(condition_points) +
                       " points " + (condition_ok ? "ok" : "VIOLATED") + ", merit bound " +
                       (bound_ok ? "ok" : "VIOLATED"));
    CHECK(pass);
}

TEST_CASE("criterion 14: broadening quadrature") {
    const std::vector<double> widths = {2, 5, 10, 20};
    bool closed_form_ok = true, kink_ok = true, concave_ok = true;
    double worst_rel = 0.0;

    for (double c2 : {1.0 / 500, 1.0 / 2000}) {
        const PriceSpec quad = PriceSpec::quadratic(c2);
        const double a_star = solve_a_star(quad, 100.0).value;
        const auto rows = broadening_expectation(quad, a_star, widths, BroadeningDist::gaussian);
        for (const auto& [width, expected] : rows) {
            const double closed = eval_price(quad, a_star) + c2 * width * width;
            const double rel = std::abs(expected - closed) / std::abs(closed);
            worst_rel = std::max(worst_rel, rel);
            if (rel > 1e-4) closed_form_ok = false;
        }
    }
    {
        const double a_star = 100.0;
        const PriceSpec kinked =
            PriceSpec::cutoff(PriceSpec::affine(100.0, 1.0, a_star), 100.0 / 1.25, 1.25);
        const auto rows = broadening_expectation(kinked, a_star, widths, BroadeningDist::gaussian);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].second > rows[i - 1].second)) kink_ok = false;
    }
    {
        const PriceSpec concave = PriceSpec::quadratic(-1.0 / 500);
        const auto rows =
            broadening_expectation(concave, 50.0, widths, BroadeningDist::gaussian);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].second < rows[i - 1].second)) concave_ok = false;
    }
    const bool pass = closed_form_ok && kink_ok && concave_ok;
    criterion_line(14, pass,
                   "closed-form rel err <= " + fmt(worst_rel, 8) +
                       " (want <= 1e-4); kink increasing: " + (kink_ok ? "yes" : "NO") +
                       "; concave decreasing: " + (concave_ok ? "yes" : "NO"));
    CHECK(pass);
}

TEST_CASE("criterion 15: byte-identical preset outputs") {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "mg_acceptance_determinism";
    fs::remove_all(base);

    auto run_to = [&](const std::string& sub, int workers) {
        PresetOptions opt;
        opt.scale = 0.2;
        opt.seed = 424242;
        opt.workers = workers;
        opt.out_dir = (base / sub).string();
        return run_preset("fig7", opt);
    };
    const PresetOutput a = run_to("a", 1);
    const PresetOutput b = run_to("b", 1);
    const PresetOutput c = run_to("c", 4);

    bool identical = a.files.size() == b.files.size() && b.files.size() == c.files.size();
    for (std::size_t i = 0; identical && i < a.files.size(); ++i) {
        if (fs::path(a.files[i]).extension() == ".json") {
            // Manifests are compared as parsed objects with the wall-clock
            // field dropped; everything else must match exactly.
            auto ja = json::parse(read_text_file(a.files[i]));
            auto jb = json::parse(read_text_file(b.files[i]));
            auto jc = json::parse(read_text_file(c.files[i]));
            ja.erase("wall_time_ms");
            jb.erase("wall_time_ms");
            jc.erase("wall_time_ms");
            identical = ja == jb && jb == jc;
        } else {
            const std::string ca = read_text_file(a.files[i]);
            identical = ca == read_text_file(b.files[i]) && ca == read_text_file(c.files[i]);
            if (ca.empty()) identical = false;
        }
    }
    criterion_line(15, identical,
                   "preset fig7 run twice and with 1 vs 4 workers: " +
                       std::string(identical ? "byte-identical datasets" : "OUTPUTS DIFFER"));
    CHECK(identical);
}
