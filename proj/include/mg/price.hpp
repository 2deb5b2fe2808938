#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

// Reserve-price functions R(x) and their calculus: evaluation, the merit-order
// ladder, the regulatory cut-off wrapper, finite-difference curvature checks
// and the quadrature of <R> under broadened imbalance distributions.

namespace mg {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a requested imbalance exceeds the merit ladder's capacity.
/// This is the "reserve exhausted" event; the engine turns it into a
/// run-terminating record rather than a crash.
struct ReserveExhausted : std::runtime_error {
    ReserveExhausted(double requested_, double capacity_)
        : std::runtime_error("reserve exhausted: |x| exceeds ladder capacity"),
          requested(requested_),
          capacity(capacity_),
          overshoot(std::abs(requested_) - capacity_) {}
    double requested;
    double capacity;
    double overshoot;
};

// ---- Merit-order ladder ------------------------------------------------------

struct MeritStep {
    double capacity = 0.0;        // MW, > 0
    double marginal_price = 0.0;  // EUR/MWh at this activation step
};

/// Piecewise-constant marginal price p(x) defined by activation steps on each
/// side of zero, plus the average-price curve R(x) = (integral of p)/x.
/// Steps are listed in activation order (cheapest first). Within each side the
/// magnitude of the marginal price must be non-decreasing, which is what makes
/// R non-decreasing overall.
class MeritLadder {
public:
    MeritLadder() = default;

    static MeritLadder from_steps(std::vector<MeritStep> positive,
                                  std::vector<MeritStep> negative) {
        MeritLadder l;
        l.positive_ = std::move(positive);
        l.negative_ = std::move(negative);
        l.validate();
        l.build();
        return l;
    }

    /// CSV columns: sign,capacity_mw,marginal_price with sign in {+,-}.
    /// Rows appear in activation order within each sign. '#' starts a comment.
    static MeritLadder from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("merit ladder: cannot open " + path);
        return from_csv_stream(in, path);
    }

    static MeritLadder from_csv_stream(std::istream& in, const std::string& label = "<stream>") {
        std::vector<MeritStep> pos, neg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n,") == std::string::npos) continue;
            std::istringstream row(line);
            std::string sign, cap, price;
            if (!std::getline(row, sign, ',') || !std::getline(row, cap, ',') ||
                !std::getline(row, price, ',')) {
                throw ConfigError("merit ladder: malformed row " + std::to_string(lineno) +
                                  " in " + label);
            }
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r\n");
                const auto e = s.find_last_not_of(" \t\r\n");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            sign = trim(sign);
            if (sign == "sign") continue;  // header row
            MeritStep step{std::stod(trim(cap)), std::stod(trim(price))};
            if (sign == "+" || sign == "pos" || sign == "positive")
                pos.push_back(step);
            else if (sign == "-" || sign == "neg" || sign == "negative")
                neg.push_back(step);
            else
                throw ConfigError("merit ladder: unknown sign '" + sign + "' in " + label);
        }
        return from_steps(std::move(pos), std::move(neg));
    }

    double positive_capacity() const noexcept { return pos_cum_.empty() ? 0.0 : pos_cum_.back(); }
    double negative_capacity() const noexcept { return neg_cum_.empty() ? 0.0 : neg_cum_.back(); }

    const std::vector<MeritStep>& positive_steps() const noexcept { return positive_; }
    const std::vector<MeritStep>& negative_steps() const noexcept { return negative_; }

    /// Marginal price p(x). p(0) is the midpoint of the two first steps.
    double marginal_price(double x) const {
        if (x > 0.0) return side_price(positive_, pos_cum_, x);
        if (x < 0.0) return side_price(negative_, neg_cum_, -x);
        return boundary_price();
    }

    /// Average price R(x) = (integral_0^x p)/x, with R(0) taken as the
    /// midpoint of p(0+) and p(0-).
    double average_price(double x) const {
        if (x == 0.0) return boundary_price();
        if (x > 0.0) return side_integral(positive_, pos_cum_, pos_int_, x) / x;
        return -side_integral(negative_, neg_cum_, neg_int_, -x) / x;
    }

    /// Marginal price interpolated piecewise-linearly between step midpoints,
    /// constant beyond the outermost midpoints. Used by the curvature checks,
    /// which presume a differentiable marginal.
    double smoothed_marginal(double x) const {
        if (x >= 0.0) return side_smooth(pos_nodes_, pos_node_p_, x);
        return side_smooth(neg_nodes_, neg_node_p_, -x);
    }

    /// Average price of the smoothed marginal (exact integral of the
    /// piecewise-linear interpolant).
    double smoothed_average_price(double x) const {
        if (x == 0.0) return boundary_price();
        if (x > 0.0) return side_smooth_integral(pos_nodes_, pos_node_p_, pos_node_int_, x,
                                                 positive_capacity()) / x;
        return -side_smooth_integral(neg_nodes_, neg_node_p_, neg_node_int_, -x,
                                      negative_capacity()) / x;
    }

private:
    void validate() const {
        if (positive_.empty() && negative_.empty())
            throw ConfigError("merit ladder: no steps");
        for (const auto* side : {&positive_, &negative_}) {
            for (const auto& s : *side)
                if (!(s.capacity > 0.0))
                    throw ConfigError("merit ladder: capacities must be positive");
        }
        for (std::size_t i = 1; i < positive_.size(); ++i)
            if (positive_[i].marginal_price < positive_[i - 1].marginal_price)
                throw ConfigError("merit ladder: positive marginal prices must be non-decreasing");
        for (std::size_t i = 1; i < negative_.size(); ++i)
            if (negative_[i].marginal_price > negative_[i - 1].marginal_price)
                throw ConfigError("merit ladder: negative marginal prices must be non-increasing");
    }

    void build() {
        build_side(positive_, pos_cum_, pos_int_, pos_nodes_, pos_node_p_, pos_node_int_);
        build_side(negative_, neg_cum_, neg_int_, neg_nodes_, neg_node_p_, neg_node_int_);
    }

    static void build_side(const std::vector<MeritStep>& steps, std::vector<double>& cum,
                           std::vector<double>& integ, std::vector<double>& nodes,
                           std::vector<double>& node_p, std::vector<double>& node_int) {
        cum.clear();
        integ.clear();
        nodes.clear();
        node_p.clear();
        node_int.clear();
        double c = 0.0, f = 0.0;
        for (const auto& s : steps) {
            c += s.capacity;
            f += s.capacity * s.marginal_price;
            cum.push_back(c);
            integ.push_back(f);
        }
        if (steps.empty()) return;
        // Smoothed profile nodes: 0, the step midpoints, and the outer edge.
        nodes.push_back(0.0);
        node_p.push_back(steps.front().marginal_price);
        double lo = 0.0;
        for (const auto& s : steps) {
            nodes.push_back(lo + 0.5 * s.capacity);
            node_p.push_back(s.marginal_price);
            lo += s.capacity;
        }
        nodes.push_back(lo);
        node_p.push_back(steps.back().marginal_price);
        // Cumulative exact integral of the piecewise-linear profile.
        node_int.assign(nodes.size(), 0.0);
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const double dx = nodes[i] - nodes[i - 1];
            node_int[i] = node_int[i - 1] + 0.5 * (node_p[i] + node_p[i - 1]) * dx;
        }
    }

    double boundary_price() const {
        if (!positive_.empty() && !negative_.empty())
            return 0.5 * (positive_.front().marginal_price + negative_.front().marginal_price);
        if (!positive_.empty()) return positive_.front().marginal_price;
        return negative_.front().marginal_price;
    }

    static double side_price(const std::vector<MeritStep>& steps, const std::vector<double>& cum,
                             double depth) {
        if (steps.empty() || depth > cum.back())
            throw ReserveExhausted(depth, cum.empty() ? 0.0 : cum.back());
        const auto it = std::lower_bound(cum.begin(), cum.end(), depth);
        return steps[static_cast<std::size_t>(it - cum.begin())].marginal_price;
    }

    static double side_integral(const std::vector<MeritStep>& steps,
                                const std::vector<double>& cum, const std::vector<double>& integ,
                                double depth) {
        if (steps.empty() || depth > cum.back())
            throw ReserveExhausted(depth, cum.empty() ? 0.0 : cum.back());
        const auto it = std::lower_bound(cum.begin(), cum.end(), depth);
        const std::size_t k = static_cast<std::size_t>(it - cum.begin());
        const double below = k == 0 ? 0.0 : integ[k - 1];
        const double inner = k == 0 ? 0.0 : cum[k - 1];
        return below + (depth - inner) * steps[k].marginal_price;
    }

    static double side_smooth(const std::vector<double>& nodes, const std::vector<double>& p,
                              double depth) {
        if (nodes.empty() || depth > nodes.back())
            throw ReserveExhausted(depth, nodes.empty() ? 0.0 : nodes.back());
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), depth);
        std::size_t k = static_cast<std::size_t>(it - nodes.begin());
        if (k == 0) return p.front();
        if (k >= nodes.size()) return p.back();
        const double t = (depth - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
        return p[k - 1] * (1.0 - t) + p[k] * t;
    }

    static double side_smooth_integral(const std::vector<double>& nodes,
                                       const std::vector<double>& p,
                                       const std::vector<double>& node_int, double depth,
                                       double capacity) {
        if (nodes.empty() || depth > capacity) throw ReserveExhausted(depth, capacity);
        const auto it = std::upper_bound(nodes.begin(), nodes.end(), depth);
        std::size_t k = static_cast<std::size_t>(it - nodes.begin());
        if (k >= nodes.size()) return node_int.back();
        if (k == 0) return 0.0;
        const double dx = depth - nodes[k - 1];
        const double t = dx / (nodes[k] - nodes[k - 1]);
        const double p_at = p[k - 1] * (1.0 - t) + p[k] * t;
        return node_int[k - 1] + 0.5 * (p[k - 1] + p_at) * dx;
    }

    std::vector<MeritStep> positive_, negative_;
    std::vector<double> pos_cum_, pos_int_, neg_cum_, neg_int_;
    std::vector<double> pos_nodes_, pos_node_p_, pos_node_int_;
    std::vector<double> neg_nodes_, neg_node_p_, neg_node_int_;
};

// ---- Price specification -----------------------------------------------------

class PriceSpec;

struct IdentityPrice {};                                  // R(x) = x

struct ScaledLinearPrice {                                // R(x) = c * x / divisor
    double c = 1.0;
    double divisor = 1.0;  // bound to N when loaded from a game config
};

struct AffinePrice {                                      // R(x) = I + c1 (x - a_star)
    double intercept = 0.0;  // I
    double slope = 1.0;      // c1, > 0
    double a_star = 0.0;
};

struct QuadraticPrice {                                   // R(x) = x + c2 x^2
    double c2 = 0.0;
    /// Lower edge of the region where R is non-decreasing (c2 > 0).
    double monotone_floor() const noexcept {
        return c2 > 0.0 ? -1.0 / (2.0 * c2) : -std::numeric_limits<double>::infinity();
    }
    /// Upper edge of the monotone region (c2 < 0).
    double monotone_ceil() const noexcept {
        return c2 < 0.0 ? -1.0 / (2.0 * c2) : std::numeric_limits<double>::infinity();
    }
};

struct CutoffPrice {                                      // regulatory floor around zero
    std::shared_ptr<const PriceSpec> inner;
    double i_avg = 0.0;
    double factor = 1.25;
};

/// Cut-off rule: for positive imbalance the price is floored at
/// factor * i_avg, for negative imbalance it is capped at -factor * i_avg,
/// and x = 0 passes through unchanged.
inline double apply_cutoff(double inner_price, double x, double i_avg, double factor) {
    if (x > 0.0 && inner_price < factor * i_avg) return factor * i_avg;
    if (x < 0.0 && inner_price > -factor * i_avg) return -factor * i_avg;
    return inner_price;
}

class PriceSpec {
public:
    using Variant =
        std::variant<IdentityPrice, ScaledLinearPrice, AffinePrice, QuadraticPrice, MeritLadder,
                     CutoffPrice>;

    PriceSpec() : v_(IdentityPrice{}) {}
    PriceSpec(Variant v) : v_(std::move(v)) {}  // NOLINT: implicit by design

    static PriceSpec identity() { return PriceSpec(IdentityPrice{}); }
    static PriceSpec scaled_linear(double c, double divisor = 1.0) {
        return PriceSpec(ScaledLinearPrice{c, divisor});
    }
    static PriceSpec affine(double intercept, double slope, double a_star) {
        if (!(slope > 0.0)) throw ConfigError("affine price: slope must be positive");
        return PriceSpec(AffinePrice{intercept, slope, a_star});
    }
    static PriceSpec quadratic(double c2) { return PriceSpec(QuadraticPrice{c2}); }
    static PriceSpec merit(MeritLadder ladder) { return PriceSpec(std::move(ladder)); }
    static PriceSpec cutoff(PriceSpec inner, double i_avg, double factor = 1.25) {
        if (!(factor > 0.0)) throw ConfigError("cutoff price: factor must be positive");
        CutoffPrice c;
        c.inner = std::make_shared<PriceSpec>(std::move(inner));
        c.i_avg = i_avg;
        c.factor = factor;
        return PriceSpec(std::move(c));
    }

    const Variant& variant() const noexcept { return v_; }
    Variant& variant() noexcept { return v_; }

    template <class T>
    const T* get_if() const noexcept {
        return std::get_if<T>(&v_);
    }

    std::string kind() const {
        struct Vis {
            std::string operator()(const IdentityPrice&) const { return "identity"; }
            std::string operator()(const ScaledLinearPrice&) const { return "scaled_linear"; }
            std::string operator()(const AffinePrice&) const { return "affine"; }
            std::string operator()(const QuadraticPrice&) const { return "quadratic"; }
            std::string operator()(const MeritLadder&) const { return "merit_order"; }
            std::string operator()(const CutoffPrice&) const { return "cutoff"; }
        };
        return std::visit(Vis{}, v_);
    }

private:
    Variant v_;
};

struct PriceDomain {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool bounded = false;
};

inline PriceDomain price_domain(const PriceSpec& spec) {
    if (const auto* m = spec.get_if<MeritLadder>())
        return {-m->negative_capacity(), m->positive_capacity(), true};
    if (const auto* c = spec.get_if<CutoffPrice>()) return price_domain(*c->inner);
    return {};
}

/// Evaluate R(x). Throws ReserveExhausted outside a merit ladder's capacity.
inline double eval_price(const PriceSpec& spec, double x) {
    struct Vis {
        double x;
        double operator()(const IdentityPrice&) const { return x; }
        double operator()(const ScaledLinearPrice& p) const { return p.c * x / p.divisor; }
        double operator()(const AffinePrice& p) const {
            return p.intercept + p.slope * (x - p.a_star);
        }
        double operator()(const QuadraticPrice& p) const { return x + p.c2 * x * x; }
        double operator()(const MeritLadder& m) const { return m.average_price(x); }
        double operator()(const CutoffPrice& c) const {
            return apply_cutoff(eval_price(*c.inner, x), x, c.i_avg, c.factor);
        }
    };
    return std::visit(Vis{x}, spec.variant());
}

// ---- Curvature check on a smoothed ladder -------------------------------------

struct DerivativeCheck {
    double dR = 0.0;
    double d2R = 0.0;
    /// The sufficient curvature condition evaluated at x on the smoothed
    /// marginal: p'(x) > 2 p(x)/x for x > 0 (implies d2R > 0), sign-adjusted
    /// to p'(x) > -2 p(x)/x for x < 0 (implies d2R < 0).
    bool convexity_condition_holds = false;
};

/// Central finite differences of the smoothed average-price curve.
/// Requires x and x +/- h inside the ladder domain.
inline DerivativeCheck derivative_check(const MeritLadder& ladder, double x, double h) {
    if (!(h > 0.0)) throw ConfigError("derivative_check: h must be positive");
    const double r_minus = ladder.smoothed_average_price(x - h);
    const double r_0 = ladder.smoothed_average_price(x);
    const double r_plus = ladder.smoothed_average_price(x + h);
    DerivativeCheck out;
    out.dR = (r_plus - r_minus) / (2.0 * h);
    out.d2R = (r_plus - 2.0 * r_0 + r_minus) / (h * h);
    const double p = ladder.smoothed_marginal(x);
    const double dp = (ladder.smoothed_marginal(x + h) - ladder.smoothed_marginal(x - h)) / (2.0 * h);
    if (x > 0.0)
        out.convexity_condition_holds = dp > 2.0 * p / x;
    else if (x < 0.0)
        out.convexity_condition_holds = dp > -2.0 * p / x;
    return out;
}

/// Default finite-difference step: 1e-3 of the ladder's domain width.
inline double default_fd_step(const MeritLadder& ladder) {
    return 1e-3 * (ladder.positive_capacity() + ladder.negative_capacity());
}

// ---- Broadening quadrature ----------------------------------------------------

enum class BroadeningDist { gaussian, uniform };

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double eps,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double eps) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, eps, 48);
}

}  // namespace detail

/// <R> under a symmetric distribution of the imbalance centred at a_star,
/// for each width in the grid. The width is the distribution's standard
/// deviation for both supported distributions (the uniform support is then
/// [a_star - sqrt(3) w, a_star + sqrt(3) w]). Quadrature is adaptive Simpson
/// with a relative tolerance well below 1e-6. Throws ReserveExhausted if the
/// required support leaves the price domain.
inline std::vector<std::pair<double, double>> broadening_expectation(
    const PriceSpec& spec, double a_star, std::span<const double> widths, BroadeningDist dist) {
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (!(widths[i] > 0.0))
            throw ConfigError("broadening_expectation: widths must be positive");
        if (i > 0 && !(widths[i] > widths[i - 1]))
            throw ConfigError("broadening_expectation: widths must be increasing");
    }
    const PriceDomain dom = price_domain(spec);
    std::vector<std::pair<double, double>> out;
    out.reserve(widths.size());
    for (double w : widths) {
        double lo, hi;
        std::function<double(double)> density;
        if (dist == BroadeningDist::gaussian) {
            lo = a_star - 10.0 * w;
            hi = a_star + 10.0 * w;
            density = [a_star, w](double x) {
                const double z = (x - a_star) / w;
                return std::exp(-0.5 * z * z) / (w * std::sqrt(2.0 * 3.14159265358979323846));
            };
        } else {
            const double half = std::sqrt(3.0) * w;
            lo = a_star - half;
            hi = a_star + half;
            density = [lo, hi](double) { return 1.0; };  // normalised below
        }
        if (dom.bounded && (lo < dom.lo || hi > dom.hi)) {
            const double cap = std::max(std::abs(dom.lo), dom.hi);
            throw ReserveExhausted(std::max(std::abs(lo - a_star), std::abs(hi - a_star)) +
                                       std::abs(a_star),
                                   cap);
        }
        auto integrand = [&](double x) { return density(x) * eval_price(spec, x); };
        double scale = std::max({1.0, std::abs(eval_price(spec, a_star)),
                                 std::abs(eval_price(spec, hi)), std::abs(eval_price(spec, lo))});
        double value = detail::integrate(integrand, lo, hi, 1e-9 * scale);
        if (dist == BroadeningDist::uniform) value /= (hi - lo);
        out.emplace_back(w, value);
    }
    return out;
}

}  // namespace mg
