#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mg/core.hpp"
#include "mg/equilibrium.hpp"
#include "mg/price.hpp"
#include "mg/rng.hpp"

// Flat key-value config files, their canonical serialization, and the stable
// 64-bit config hash recorded in every output.
//
// Schema (one key per line, '#' comments, vectors comma-separated or @file):
//   n_agents, n_patterns, n_strategies, intraday_price
//   weights        = uniform[:W_total] | exponential[:mean]
//                  | pareto[:exponent,lower] | realistic
//                  | explicit:v1,v2,... | @file
//   risk_aversion  = -inf | <eps> | <eps list, length N, -inf allowed> | @file
//   strategy_bias  = <p in [0,1]> | auto        (auto = equilibrium bias)
//   price.kind     = identity | scaled_linear | affine | quadratic
//                  | merit_order | cutoff
//     scaled_linear: price.c, price.divisor (0 binds to n_agents)
//     affine:        price.i, price.c1, price.a_star
//     quadratic:     price.c2
//     merit_order:   price.ladder = <csv path>, or inline
//                    price.ladder_pos / price.ladder_neg = cap:price;...
//     cutoff:        price.i_avg, price.factor, price.inner.* (non-cutoff)
//   noise.kind = none | gaussian ; noise.sigma ; noise.mean
//   seed, max_steps, convergence_tol, sample_count,
//   eval_uses_noise, update_inactive

namespace mg {

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + s + "' for " + key);
    }
}

inline long parse_long(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value '" + s + "' for " + key);
    }
}

inline bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: bad boolean value '" + s + "' for " + key);
}

inline std::string ladder_side_text(const std::vector<MeritStep>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += ';';
        out += fmt_double(steps[i].capacity) + ":" + fmt_double(steps[i].marginal_price);
    }
    return out;
}

inline std::vector<MeritStep> parse_ladder_side(const std::string& text, const std::string& key) {
    std::vector<MeritStep> steps;
    for (const auto& item : split(text, ';')) {
        if (item.empty()) continue;
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("config: bad ladder step '" + item + "' in " + key);
        steps.push_back({parse_double(parts[0], key), parse_double(parts[1], key)});
    }
    return steps;
}

inline void serialize_price(const PriceSpec& spec, const std::string& prefix,
                            std::vector<std::pair<std::string, std::string>>& out) {
    out.emplace_back(prefix + "kind", spec.kind());
    if (const auto* p = spec.get_if<ScaledLinearPrice>()) {
        out.emplace_back(prefix + "c", fmt_double(p->c));
        out.emplace_back(prefix + "divisor", fmt_double(p->divisor));
    } else if (const auto* p = spec.get_if<AffinePrice>()) {
        out.emplace_back(prefix + "i", fmt_double(p->intercept));
        out.emplace_back(prefix + "c1", fmt_double(p->slope));
        out.emplace_back(prefix + "a_star", fmt_double(p->a_star));
    } else if (const auto* p = spec.get_if<QuadraticPrice>()) {
        out.emplace_back(prefix + "c2", fmt_double(p->c2));
    } else if (const auto* p = spec.get_if<MeritLadder>()) {
        out.emplace_back(prefix + "ladder_pos", ladder_side_text(p->positive_steps()));
        out.emplace_back(prefix + "ladder_neg", ladder_side_text(p->negative_steps()));
    } else if (const auto* p = spec.get_if<CutoffPrice>()) {
        out.emplace_back(prefix + "i_avg", fmt_double(p->i_avg));
        out.emplace_back(prefix + "factor", fmt_double(p->factor));
        serialize_price(*p->inner, prefix + "inner.", out);
    }
}

inline PriceSpec parse_price(const std::map<std::string, std::string>& kv,
                             const std::string& prefix, bool allow_cutoff) {
    const auto get = [&](const std::string& k) -> const std::string* {
        const auto it = kv.find(prefix + k);
        return it == kv.end() ? nullptr : &it->second;
    };
    const std::string kind = get("kind") ? *get("kind") : "identity";
    if (kind == "identity") return PriceSpec::identity();
    if (kind == "scaled_linear") {
        const double c = get("c") ? parse_double(*get("c"), prefix + "c") : 1.0;
        const double div = get("divisor") ? parse_double(*get("divisor"), prefix + "divisor") : 0.0;
        return PriceSpec::scaled_linear(c, div);
    }
    if (kind == "affine") {
        if (!get("i") || !get("c1"))
            throw ConfigError("config: affine price needs " + prefix + "i and " + prefix + "c1");
        const double a_star = get("a_star") ? parse_double(*get("a_star"), prefix + "a_star") : 0.0;
        return PriceSpec::affine(parse_double(*get("i"), prefix + "i"),
                                 parse_double(*get("c1"), prefix + "c1"), a_star);
    }
    if (kind == "quadratic") {
        if (!get("c2")) throw ConfigError("config: quadratic price needs " + prefix + "c2");
        return PriceSpec::quadratic(parse_double(*get("c2"), prefix + "c2"));
    }
    if (kind == "merit_order") {
        if (get("ladder")) return PriceSpec::merit(MeritLadder::from_csv(*get("ladder")));
        if (get("ladder_pos") || get("ladder_neg")) {
            auto pos = get("ladder_pos")
                           ? parse_ladder_side(*get("ladder_pos"), prefix + "ladder_pos")
                           : std::vector<MeritStep>{};
            auto neg = get("ladder_neg")
                           ? parse_ladder_side(*get("ladder_neg"), prefix + "ladder_neg")
                           : std::vector<MeritStep>{};
            return PriceSpec::merit(MeritLadder::from_steps(std::move(pos), std::move(neg)));
        }
        throw ConfigError("config: merit_order price needs " + prefix + "ladder");
    }
    if (kind == "cutoff") {
        if (!allow_cutoff) throw ConfigError("config: cutoff inner price cannot be cutoff");
        if (!get("i_avg")) throw ConfigError("config: cutoff price needs " + prefix + "i_avg");
        const double factor = get("factor") ? parse_double(*get("factor"), prefix + "factor") : 1.25;
        return PriceSpec::cutoff(parse_price(kv, prefix + "inner.", false),
                                 parse_double(*get("i_avg"), prefix + "i_avg"), factor);
    }
    throw ConfigError("config: unknown price kind '" + kind + "'");
}

inline std::string weights_text(const WeightSpec& spec) {
    if (const auto* u = std::get_if<UniformWeights>(&spec))
        return u->w_total > 0.0 ? "uniform:" + fmt_double(u->w_total) : "uniform";
    if (const auto* e = std::get_if<ExponentialWeights>(&spec))
        return "exponential:" + fmt_double(e->mean);
    if (const auto* p = std::get_if<ParetoWeights>(&spec))
        return "pareto:" + fmt_double(p->exponent) + "," + fmt_double(p->lower);
    if (std::get_if<RealisticWeights>(&spec)) return "realistic";
    const auto& ex = std::get<ExplicitWeights>(spec);
    std::string out = "explicit:";
    for (std::size_t i = 0; i < ex.values.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(ex.values[i]);
    }
    return out;
}

inline WeightSpec parse_weights(const std::string& value) {
    if (!value.empty() && value[0] == '@') {
        std::ifstream in(value.substr(1));
        if (!in) throw ConfigError("config: cannot open weight file " + value.substr(1));
        ExplicitWeights ex;
        double v;
        while (in >> v) ex.values.push_back(v);
        return ex;
    }
    const auto colon = value.find(':');
    const std::string family = colon == std::string::npos ? value : value.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : value.substr(colon + 1);
    if (family == "uniform")
        return UniformWeights{args.empty() ? 0.0 : parse_double(args, "weights")};
    if (family == "exponential")
        return ExponentialWeights{args.empty() ? 1.0 : parse_double(args, "weights")};
    if (family == "pareto") {
        ParetoWeights p;
        if (!args.empty()) {
            const auto parts = split(args, ',');
            if (!parts.empty()) p.exponent = parse_double(parts[0], "weights");
            if (parts.size() > 1) p.lower = parse_double(parts[1], "weights");
        }
        return p;
    }
    if (family == "realistic") return RealisticWeights{};
    if (family == "explicit") {
        ExplicitWeights ex;
        for (const auto& tok : split(args, ','))
            if (!tok.empty()) ex.values.push_back(parse_double(tok, "weights"));
        return ex;
    }
    throw ConfigError("config: unknown weight family '" + family + "'");
}

inline std::string risk_token(const RiskAversion& ra) {
    return ra.never_gates() ? "-inf" : fmt_double(ra.epsilon());
}

inline RiskAversion parse_risk_token(const std::string& tok) {
    if (tok == "-inf" || tok == "-INF" || tok == "never") return RiskAversion::never();
    return RiskAversion::threshold(parse_double(tok, "risk_aversion"));
}

inline std::string risk_text(const std::vector<RiskAversion>& ra) {
    if (ra.empty()) return "-inf";
    bool all_same = true;
    for (const auto& r : ra)
        if (!(r == ra.front())) {
            all_same = false;
            break;
        }
    if (all_same) return risk_token(ra.front());
    std::string out;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (i) out += ',';
        out += risk_token(ra[i]);
    }
    return out;
}

}  // namespace detail

/// Canonical text form of a config: fixed key order, %.17g numerics. Equal
/// configs serialize identically; the config hash is the FNV-1a of this text.
inline std::string canonical_config_text(const GameConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("n_agents", std::to_string(cfg.n_agents));
    kv.emplace_back("n_patterns", std::to_string(cfg.n_patterns));
    kv.emplace_back("n_strategies", std::to_string(cfg.n_strategies));
    kv.emplace_back("intraday_price", detail::fmt_double(cfg.intraday_price));
    kv.emplace_back("weights", detail::weights_text(cfg.weight_spec));
    kv.emplace_back("risk_aversion", detail::risk_text(cfg.risk_aversion));
    kv.emplace_back("strategy_bias", detail::fmt_double(cfg.strategy_bias));
    detail::serialize_price(cfg.price, "price.", kv);
    kv.emplace_back("noise.kind", cfg.noise.kind == NoiseSpec::Kind::gaussian ? "gaussian" : "none");
    kv.emplace_back("noise.sigma", detail::fmt_double(cfg.noise.sigma));
    kv.emplace_back("noise.mean", detail::fmt_double(cfg.noise.mean));
    kv.emplace_back("seed", std::to_string(cfg.seed));
    kv.emplace_back("max_steps", std::to_string(cfg.max_steps));
    kv.emplace_back("convergence_tol", detail::fmt_double(cfg.convergence_tol));
    kv.emplace_back("sample_count", std::to_string(cfg.sample_count));
    kv.emplace_back("eval_uses_noise", cfg.eval_uses_noise ? "true" : "false");
    kv.emplace_back("update_inactive", cfg.update_inactive ? "true" : "false");
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

inline std::uint64_t config_hash(const GameConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    return fnv1a64(text.data(), text.size());
}

inline GameConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
        kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
    }

    GameConfig cfg;
    const auto take = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = take("n_agents")) cfg.n_agents = static_cast<int>(detail::parse_long(*v, "n_agents"));
    if (const auto* v = take("n_patterns")) cfg.n_patterns = static_cast<int>(detail::parse_long(*v, "n_patterns"));
    if (const auto* v = take("n_strategies")) cfg.n_strategies = static_cast<int>(detail::parse_long(*v, "n_strategies"));
    if (const auto* v = take("intraday_price")) cfg.intraday_price = detail::parse_double(*v, "intraday_price");
    if (const auto* v = take("weights")) cfg.weight_spec = detail::parse_weights(*v);
    if (const auto* v = take("seed")) cfg.seed = static_cast<std::uint64_t>(detail::parse_long(*v, "seed"));
    if (const auto* v = take("max_steps")) cfg.max_steps = detail::parse_long(*v, "max_steps");
    if (const auto* v = take("convergence_tol")) cfg.convergence_tol = detail::parse_double(*v, "convergence_tol");
    if (const auto* v = take("sample_count")) cfg.sample_count = static_cast<int>(detail::parse_long(*v, "sample_count"));
    if (const auto* v = take("eval_uses_noise")) cfg.eval_uses_noise = detail::parse_bool(*v, "eval_uses_noise");
    if (const auto* v = take("update_inactive")) cfg.update_inactive = detail::parse_bool(*v, "update_inactive");

    cfg.price = detail::parse_price(kv, "price.", true);

    if (const auto* v = take("noise.kind")) {
        const double sigma = take("noise.sigma") ? detail::parse_double(*take("noise.sigma"), "noise.sigma") : 0.0;
        const double mean = take("noise.mean") ? detail::parse_double(*take("noise.mean"), "noise.mean") : 0.0;
        if (*v == "gaussian")
            cfg.noise = NoiseSpec::gaussian(sigma, mean);
        else if (*v == "none")
            cfg.noise = NoiseSpec::none();
        else
            throw ConfigError("config: unknown noise kind '" + *v + "'");
    }

    if (const auto* v = take("risk_aversion")) {
        std::vector<std::string> toks;
        if (!v->empty() && (*v)[0] == '@') {
            std::ifstream rin(v->substr(1));
            if (!rin) throw ConfigError("config: cannot open risk file " + v->substr(1));
            std::string tok;
            while (rin >> tok) toks.push_back(tok);
        } else {
            toks = detail::split(*v, ',');
        }
        if (toks.size() == 1) {
            const RiskAversion ra = detail::parse_risk_token(toks[0]);
            if (!ra.never_gates())
                cfg.risk_aversion.assign(static_cast<std::size_t>(cfg.n_agents), ra);
        } else {
            for (const auto& tok : toks) cfg.risk_aversion.push_back(detail::parse_risk_token(tok));
        }
    }

    // Bind the scaled-linear divisor to N before anything evaluates the price.
    if (auto* p = std::get_if<ScaledLinearPrice>(&cfg.price.variant()))
        if (p->divisor <= 0.0) p->divisor = static_cast<double>(cfg.n_agents);

    if (const auto* v = take("strategy_bias")) {
        if (*v == "auto") {
            const WeightVector w = cfg.weights();
            const AStarResult a = solve_a_star(cfg.price, cfg.intraday_price, cfg.noise.mean);
            cfg.strategy_bias = bias_from_equilibrium(a.value, w.total());
        } else {
            cfg.strategy_bias = detail::parse_double(*v, "strategy_bias");
        }
    }

    cfg.validate();
    return cfg;
}

inline GameConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline void save_config(const GameConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write " + path);
    out << canonical_config_text(cfg);
}

}  // namespace mg
