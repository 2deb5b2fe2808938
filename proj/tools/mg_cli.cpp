// Batch CLI for the minority-game reserve-arbitrage toolkit.
//
// Subcommands: run, ensemble, sweep, preset <name>, nash, price analyze,
// ingest intraday. Exit codes: 0 ok, 2 config error, 3 non-convergence,
// 4 reserve exhaustion, 1 other failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mg/mg.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitReserveExhausted = 4;

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string format = "json";
};

mg::GameConfig load(const CommonFlags& flags) {
    mg::GameConfig cfg = mg::load_config(flags.config_path);
    if (flags.seed_set) cfg.seed = flags.seed;
    return cfg;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-")
        std::cout << content;
    else
        mg::write_text_file(out, content);
}

int cmd_run(const CommonFlags& flags, const std::string& trace_path) {
    const mg::GameConfig cfg = load(flags);
    mg::RunResult result;
    if (trace_path.empty()) {
        result = mg::run_until_converged(cfg);
    } else {
        std::string trace = "t,mu,arbitrage,eta,price,active_count\n";
        char buf[160];
        result = mg::run_with_callback(cfg, [&](const mg::Game&, const mg::StepOutcome& s) {
            std::snprintf(buf, sizeof(buf), "%ld,%d,%.10g,%.10g,%.10g,%d\n", s.t, s.mu + 1,
                          s.arbitrage, s.eta, s.price, s.active_count);
            trace += buf;
        });
        mg::write_text_file(trace_path, trace);
    }
    emit(flags.out, mg::to_json(result).dump(2) + "\n");
    if (result.reserve_exhausted) return kExitReserveExhausted;
    if (!result.converged) return kExitNotConverged;
    return kExitOk;
}

int cmd_ensemble(const CommonFlags& flags, int samples) {
    const mg::GameConfig cfg = load(flags);
    const int n = samples > 0 ? samples : cfg.sample_count;
    const mg::EnsembleResult e = mg::run_ensemble(cfg, n, cfg.seed, flags.workers);
    emit(flags.out, mg::to_json(e, true).dump(2) + "\n");
    if (e.exhausted_count > 0) return kExitReserveExhausted;
    if (e.converged_count < e.sample_count) return kExitNotConverged;
    return kExitOk;
}

int cmd_sweep(const CommonFlags& flags, const std::vector<std::string>& axes, int samples,
              std::size_t cap) {
    mg::SweepSpec spec;
    spec.base = load(flags);
    spec.samples_per_point = samples > 0 ? samples : spec.base.sample_count;
    spec.point_cap = cap;
    for (const auto& axis : axes) {
        const auto eq = axis.find('=');
        if (eq == std::string::npos)
            throw mg::ConfigError("sweep: --axis expects name=v1,v2,... got '" + axis + "'");
        mg::SweepAxis a;
        a.param = axis.substr(0, eq);
        for (const auto& v : mg::detail::split(axis.substr(eq + 1), ','))
            if (!v.empty()) a.values.push_back(v);
        spec.axes.push_back(std::move(a));
    }
    const mg::SweepResult result = mg::run_sweep(spec, spec.base.seed, flags.workers);
    const std::string csv = mg::sweep_csv(result);
    if (flags.out.empty() || flags.out == "-") {
        std::cout << csv;
        return kExitOk;
    }
    std::filesystem::create_directories(flags.out);
    mg::write_text_file((std::filesystem::path(flags.out) / "sweep.csv").string(), csv);
    mg::json manifest;
    manifest["seed_base"] = result.seed_base;
    manifest["axes"] = result.axis_names;
    manifest["points"] = result.points.size();
    manifest["samples_per_point"] = spec.samples_per_point;
    manifest["base_config_hash"] = mg::config_hash(spec.base);
    mg::write_text_file((std::filesystem::path(flags.out) / "sweep_manifest.json").string(),
                        manifest.dump(2) + "\n");
    int exhausted = 0, unconverged = 0;
    for (const auto& p : result.points) {
        exhausted += p.ensemble.exhausted_count;
        unconverged += p.ensemble.sample_count - p.ensemble.converged_count;
    }
    if (exhausted > 0) return kExitReserveExhausted;
    if (unconverged > 0) return kExitNotConverged;
    return kExitOk;
}

int cmd_nash(const CommonFlags& flags, bool measure) {
    const mg::GameConfig cfg = load(flags);
    const mg::WeightVector w = cfg.weights();
    const mg::AStarResult a = mg::solve_a_star(cfg.price, cfg.intraday_price, cfg.noise.mean);
    mg::EquilibriumReport rep = mg::nash_variance(w, a.value);
    rep.saturated = rep.saturated || a.saturated;
    mg::json j;
    j["report"] = mg::to_json(rep);
    j["config_hash"] = mg::config_hash(cfg);
    if (measure) {
        const mg::EnsembleResult e = mg::run_ensemble(cfg, cfg.sample_count, cfg.seed,
                                                      flags.workers);
        j["measured"] = {{"mean_a", mg::to_json(e.mean_a)},
                         {"sigma_a", mg::to_json(e.sigma_a)},
                         {"samples", e.sample_count}};
    }
    emit(flags.out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_price_analyze(const std::string& ladder_path, double h_override, int points,
                      const std::string& out) {
    const mg::MeritLadder ladder = mg::MeritLadder::from_csv(ladder_path);
    const double h = h_override > 0 ? h_override : mg::default_fd_step(ladder);
    std::string csv = "x,r,p,dr,d2r,condition_holds\n";
    char buf[200];
    const auto side = [&](double cap, double sign) {
        for (int k = 1; k < points; ++k) {
            const double x = sign * cap * k / points;
            if (std::abs(x) <= 2 * h || std::abs(x) + 2 * h >= cap) continue;
            const auto d = mg::derivative_check(ladder, x, h);
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%s\n", x,
                          ladder.average_price(x), ladder.marginal_price(x), d.dR, d.d2R,
                          d.convexity_condition_holds ? "true" : "false");
            csv += buf;
        }
    };
    side(ladder.positive_capacity(), +1.0);
    side(ladder.negative_capacity(), -1.0);
    emit(out, csv);
    return kExitOk;
}

int cmd_ingest_intraday(const std::string& in_path, const std::string& out, double factor,
                        double min_volume) {
    const mg::IntradayReport report = mg::ingest_intraday_file(in_path, factor, min_volume);
    mg::json j;
    j["intervals"] = report.intervals.size();
    j["rows_total"] = report.rows_total;
    j["rows_skipped"] = report.rows_skipped;
    j["factor"] = report.factor;
    j["min_volume"] = report.min_volume;
    j["diff_intervals"] = report.intervals_filtered_in;
    j["i_avg_mean"] = report.vwap_stats.mean;
    j["i_avg_std"] = report.vwap_stats.std;
    j["diff_mean"] = report.diff_stats.mean;
    j["i_avg_histogram"] = mg::to_json(report.vwap_hist);
    j["diff_histogram"] = mg::to_json(report.diff_hist);
    if (out.empty() || out == "-") {
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }
    std::filesystem::create_directories(out);
    mg::write_text_file((std::filesystem::path(out) / "intraday_report.json").string(),
                        j.dump(2) + "\n");
    mg::write_text_file((std::filesystem::path(out) / "i_avg_histogram.csv").string(),
                        mg::histogram_csv(report.vwap_hist));
    mg::write_text_file((std::filesystem::path(out) / "diff_histogram.csv").string(),
                        mg::histogram_csv(report.diff_hist));
    std::string intervals = "interval_start_minute,volume_mw,i_avg,closing,trades\n";
    char buf[160];
    for (const auto& s : report.intervals) {
        std::snprintf(buf, sizeof(buf), "%lld,%.10g,%.10g,%.10g,%d\n",
                      static_cast<long long>(s.interval_start), s.volume, s.vwap, s.closing,
                      s.trades);
        intervals += buf;
    }
    mg::write_text_file((std::filesystem::path(out) / "intervals.csv").string(), intervals);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minority-game simulator for reserve-power arbitrage"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string trace_path;
    int samples = 0;
    std::vector<std::string> axes;
    std::size_t cap = 4096;
    bool measure = false;

    const auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        if (needs_config)
            sub->add_option("--config", flags.config_path, "config file")->required();
        sub->add_option("--out", flags.out, "output path ('-' for stdout)");
        sub->add_option("--seed", flags.seed, "override the config seed")
            ->each([&](const std::string&) { flags.seed_set = true; });
        sub->add_option("--workers", flags.workers, "worker threads (0 = hardware)");
        sub->add_option("--format", flags.format, "output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* run = app.add_subcommand("run", "single converged run");
    add_common(run);
    run->add_option("--trace", trace_path, "per-step trace CSV");

    auto* ensemble = app.add_subcommand("ensemble", "seeded ensemble of runs");
    add_common(ensemble);
    ensemble->add_option("--samples", samples, "ensemble size (default: config)");

    auto* sweep = app.add_subcommand("sweep", "cartesian parameter sweep");
    add_common(sweep);
    sweep->add_option("--axis", axes, "axis as name=v1,v2,... (repeatable)")->required();
    sweep->add_option("--samples", samples, "samples per grid point");
    sweep->add_option("--cap", cap, "maximum number of grid points");

    auto* preset = app.add_subcommand("preset", "run a named reference experiment");
    std::string preset_name;
    mg::PresetOptions popt;
    preset->add_option("name", preset_name, "preset name")->required();
    preset->add_option("--scale", popt.scale, "shrink factor for desk-scale runs");
    preset->add_flag("--full", popt.full, "full-scale reference parameters (slow)");
    preset->add_option("--seed", popt.seed, "seed");
    preset->add_option("--workers", popt.workers, "worker threads");
    preset->add_option("--out", popt.out_dir, "output directory")->required();
    preset->add_option("--ladder", popt.ladder_path, "merit ladder CSV (appB)");

    auto* nash = app.add_subcommand("nash", "analytic equilibrium report");
    add_common(nash);
    nash->add_flag("--measure", measure, "also run the configured ensemble");

    auto* price = app.add_subcommand("price", "price-function analyses");
    auto* analyze = price->add_subcommand("analyze", "merit ladder derivative table");
    std::string ladder_path, analyze_out;
    double fd_h = 0.0;
    int fd_points = 40;
    analyze->add_option("--ladder", ladder_path, "merit ladder CSV")->required();
    analyze->add_option("--step", fd_h, "finite-difference step");
    analyze->add_option("--points", fd_points, "grid points per side");
    analyze->add_option("--out", analyze_out, "output CSV ('-' for stdout)");
    price->require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "market data ingestion");
    auto* intraday = ingest->add_subcommand("intraday", "15-minute interval aggregation");
    std::string intraday_in, intraday_out;
    double factor = 1.25, min_volume = 500.0;
    intraday->add_option("--in", intraday_in, "trade CSV")->required();
    intraday->add_option("--out", intraday_out, "output directory ('-' for stdout)");
    intraday->add_option("--factor", factor, "cut-off factor");
    intraday->add_option("--min-volume", min_volume, "interval volume filter (MW)");
    ingest->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (run->parsed()) return cmd_run(flags, trace_path);
        if (ensemble->parsed()) return cmd_ensemble(flags, samples);
        if (sweep->parsed()) return cmd_sweep(flags, axes, samples, cap);
        if (preset->parsed()) {
            const mg::PresetOutput out = mg::run_preset(preset_name, popt);
            std::fprintf(stderr, "preset %s: wrote %zu files to %s\n", preset_name.c_str(),
                         out.files.size(), popt.out_dir.c_str());
            return kExitOk;
        }
        if (nash->parsed()) return cmd_nash(flags, measure);
        if (analyze->parsed()) return cmd_price_analyze(ladder_path, fd_h, fd_points, analyze_out);
        if (intraday->parsed())
            return cmd_ingest_intraday(intraday_in, intraday_out, factor, min_volume);
    } catch (const mg::ReserveExhausted& e) {
        std::fprintf(stderr, "error: %s (requested %.6g, capacity %.6g)\n", e.what(), e.requested,
                     e.capacity);
        return kExitReserveExhausted;
    } catch (const mg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitConfigError;
}
