#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

// Time-series and ensemble statistics.
//
// All variances and kurtoses use the population convention
// (second moment about the mean, no n-1 correction).

namespace mg {

/// Streaming moment accumulator up to fourth order. Mergeable, so partial
/// statistics from parallel workers combine associatively.
class MomentAccumulator {
public:
    void add(double x) noexcept {
        const double n1 = static_cast<double>(n_);
        n_ += 1;
        const double n = static_cast<double>(n_);
        const double delta = x - m1_;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        m1_ += delta_n;
        m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ -
               4.0 * delta_n * m3_;
        m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
        m2_ += term1;
    }

    void merge(const MomentAccumulator& other) noexcept {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(other.n_);
        const double n = na + nb;
        const double delta = other.m1_ - m1_;
        const double delta2 = delta * delta;
        const double delta3 = delta * delta2;
        const double delta4 = delta2 * delta2;

        const double m1 = (na * m1_ + nb * other.m1_) / n;
        const double m2 = m2_ + other.m2_ + delta2 * na * nb / n;
        double m3 = m3_ + other.m3_ + delta3 * na * nb * (na - nb) / (n * n);
        m3 += 3.0 * delta * (na * other.m2_ - nb * m2_) / n;
        double m4 = m4_ + other.m4_ +
                    delta4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n);
        m4 += 6.0 * delta2 * (na * na * other.m2_ + nb * nb * m2_) / (n * n) +
              4.0 * delta * (na * other.m3_ - nb * m3_) / n;

        n_ += other.n_;
        m1_ = m1;
        m2_ = m2;
        m3_ = m3;
        m4_ = m4;
    }

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return m1_; }
    double variance() const noexcept { return n_ > 0 ? std::max(0.0, m2_ / static_cast<double>(n_)) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }

    double excess_kurtosis() const noexcept {
        if (n_ == 0 || m2_ <= 0.0) return 0.0;
        const double n = static_cast<double>(n_);
        return n * m4_ / (m2_ * m2_) - 3.0;
    }

private:
    std::uint64_t n_ = 0;
    double m1_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct SeriesStats {
    double mean = 0.0;
    double variance = 0.0;
    double std = 0.0;
    double excess_kurtosis = 0.0;
    std::uint64_t count = 0;
};

inline SeriesStats series_stats(std::span<const double> xs) {
    MomentAccumulator acc;
    for (double x : xs) acc.add(x);
    return {acc.mean(), acc.variance(), acc.stddev(), acc.excess_kurtosis(), acc.count()};
}

inline double population_std(std::span<const double> xs) {
    MomentAccumulator acc;
    for (double x : xs) acc.add(x);
    return acc.stddev();
}

// ---- Histograms ------------------------------------------------------------

struct Histogram {
    std::vector<double> bin_edges;     // strictly increasing, size = bins + 1
    std::vector<std::uint64_t> counts; // size = bins
    bool has_overlay = false;
    double overlay_mean = 0.0;
    double overlay_std = 0.0;

    std::uint64_t total() const noexcept {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

/// Freedman-Diaconis bin edges; degenerate samples fall back to one bin.
inline std::vector<double> freedman_diaconis_edges(std::span<const double> xs,
                                                   std::size_t max_bins = 10000) {
    if (xs.empty()) throw std::invalid_argument("histogram: empty sample");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 >= sorted.size()) return sorted.back();
        return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double n_cbrt = std::cbrt(static_cast<double>(sorted.size()));
    double width = 2.0 * iqr / n_cbrt;
    std::size_t bins = 1;
    if (width > 0.0 && hi > lo) {
        bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        bins = std::clamp<std::size_t>(bins, 1, max_bins);
    }
    std::vector<double> edges(bins + 1);
    const double span_w = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = lo + span_w * static_cast<double>(i) / static_cast<double>(bins);
    return edges;
}

/// Bin a sample into the given edges. Values equal to the last edge land in
/// the last bin; values outside the edge range are clamped into the end bins
/// so that total() always equals the sample count.
inline Histogram make_histogram(std::span<const double> xs, std::vector<double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("histogram: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw std::invalid_argument("histogram: edges must be strictly increasing");
    Histogram h;
    h.bin_edges = std::move(edges);
    h.counts.assign(h.bin_edges.size() - 1, 0);
    for (double x : xs) {
        auto it = std::upper_bound(h.bin_edges.begin(), h.bin_edges.end(), x);
        std::ptrdiff_t idx = (it - h.bin_edges.begin()) - 1;
        idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

inline Histogram make_histogram(std::span<const double> xs) {
    return make_histogram(xs, freedman_diaconis_edges(xs));
}

// ---- Sliding-window deviation ----------------------------------------------

/// Sliding-window population standard deviation, one value per complete
/// window position. Short series yield an empty result.
inline std::vector<double> running_sigma(std::span<const double> xs, std::size_t window) {
    if (window < 2) throw std::invalid_argument("running_sigma: window must be >= 2");
    std::vector<double> out;
    if (xs.size() < window) return out;

    // Center on the global mean first; keeps the rolling sums well conditioned
    // and makes constant series come out exactly zero.
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());

    std::vector<double> c(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) c[i] = xs[i] - mean;

    const double w = static_cast<double>(window);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
        sum += c[i];
        sumsq += c[i] * c[i];
    }
    out.reserve(xs.size() - window + 1);
    for (std::size_t i = window;; ++i) {
        const double m = sum / w;
        out.push_back(std::sqrt(std::max(0.0, sumsq / w - m * m)));
        if (i >= xs.size()) break;
        sum += c[i] - c[i - window];
        sumsq += c[i] * c[i] - c[i - window] * c[i - window];
    }
    return out;
}

// ---- Variance decomposition --------------------------------------------------

struct VarianceDecomposition {
    double sigma_a = 0.0;
    double sigma_eta = 0.0;
    double sigma_total = 0.0;
    double residual_abs = 0.0;  // sigma_total^2 - sigma_a^2 - sigma_eta^2
    double residual_rel = 0.0;  // residual_abs / sigma_total^2
};

inline VarianceDecomposition variance_decomposition(std::span<const double> a,
                                                    std::span<const double> eta) {
    if (a.size() != eta.size())
        throw std::invalid_argument("variance_decomposition: length mismatch");
    MomentAccumulator sa, se, st;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa.add(a[i]);
        se.add(eta[i]);
        st.add(a[i] + eta[i]);
    }
    VarianceDecomposition d;
    d.sigma_a = sa.stddev();
    d.sigma_eta = se.stddev();
    d.sigma_total = st.stddev();
    d.residual_abs = st.variance() - sa.variance() - se.variance();
    d.residual_rel = st.variance() > 0.0 ? d.residual_abs / st.variance() : 0.0;
    return d;
}

// ---- Gaussianity -------------------------------------------------------------

struct GaussianityCheck {
    double excess_kurtosis = 0.0;
    bool is_gaussian = false;
    double threshold = 0.2;
};

inline GaussianityCheck gaussianity(std::span<const double> xs, double threshold = 0.2) {
    MomentAccumulator acc;
    for (double x : xs) acc.add(x);
    GaussianityCheck g;
    g.excess_kurtosis = acc.excess_kurtosis();
    g.threshold = threshold;
    g.is_gaussian = std::abs(g.excess_kurtosis) < threshold;
    return g;
}

}  // namespace mg
