#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mg/config_io.hpp"
#include "mg/engine.hpp"
#include "mg/equilibrium.hpp"
#include "mg/stats.hpp"

// JSON and CSV emitters for results, reports and histograms. Column names are
// fixed; numeric formatting is deterministic so identical runs produce
// identical bytes.

namespace mg {

using json = nlohmann::json;

inline json to_json(const Histogram& h) {
    json j;
    j["bin_edges"] = h.bin_edges;
    j["counts"] = h.counts;
    if (h.has_overlay) {
        j["gaussian_overlay"] = {{"mean", h.overlay_mean}, {"std", h.overlay_std}};
    }
    return j;
}

inline Histogram histogram_from_json(const json& j) {
    Histogram h;
    h.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    h.counts = j.at("counts").get<std::vector<std::uint64_t>>();
    if (j.contains("gaussian_overlay")) {
        h.has_overlay = true;
        h.overlay_mean = j["gaussian_overlay"].at("mean").get<double>();
        h.overlay_std = j["gaussian_overlay"].at("std").get<double>();
    }
    return h;
}

inline std::string histogram_csv(const Histogram& h) {
    std::string out = "bin_lo,bin_hi,count\n";
    char buf[64];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%llu\n", h.bin_edges[i], h.bin_edges[i + 1],
                      static_cast<unsigned long long>(h.counts[i]));
        out += buf;
    }
    return out;
}

inline json to_json(const RunResult& r, bool with_histograms = true) {
    json j;
    j["mean_a"] = r.mean_a;
    j["sigma_a"] = r.sigma_a;
    j["sigma_total"] = r.sigma_total;
    j["excess_kurtosis"] = r.excess_kurtosis;
    j["mean_active_fraction"] = r.mean_active_fraction;
    j["steps_run"] = r.steps_run;
    j["converged"] = r.converged;
    j["reserve_exhausted"] = r.reserve_exhausted;
    if (r.reserve_exhausted) j["exhaustion_overshoot"] = r.exhaustion_overshoot;
    j["monotone_violations"] = r.monotone_violations;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    if (with_histograms) {
        j["histogram_a"] = to_json(r.hist_a);
        j["histogram_total"] = to_json(r.hist_total);
    }
    return j;
}

inline json to_json(const EnsembleStat& s) {
    return json{{"mean", s.mean}, {"std_error", s.std_error}};
}

inline json to_json(const EnsembleResult& e, bool with_runs = false) {
    json j;
    j["sample_count"] = e.sample_count;
    j["mean_a"] = to_json(e.mean_a);
    j["sigma_a"] = to_json(e.sigma_a);
    j["sigma_total"] = to_json(e.sigma_total);
    j["excess_kurtosis"] = to_json(e.excess_kurtosis);
    j["active_fraction"] = to_json(e.active_fraction);
    j["converged_count"] = e.converged_count;
    j["exhausted_count"] = e.exhausted_count;
    j["total_steps"] = e.total_steps;
    j["seed_base"] = e.seed_base;
    j["config_hash"] = e.config_hash;
    if (with_runs) {
        json runs = json::array();
        for (const auto& r : e.runs) runs.push_back(to_json(r, false));
        j["runs"] = runs;
    }
    return j;
}

inline json to_json(const EquilibriumReport& r) {
    json j;
    j["a_star"] = r.a_star;
    j["bias_p"] = r.bias_p;
    j["w_total"] = r.w_total;
    j["x"] = r.x;
    j["effective_agents"] = r.effective_agents;
    j["sigma_a_pred"] = r.sigma_a_pred;
    j["mean_a_pred"] = r.mean_a_pred;
    j["sigma_over_mean"] =
        std::isfinite(r.sigma_over_mean) ? json(r.sigma_over_mean) : json("inf");
    j["saturated"] = r.saturated;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace mg
