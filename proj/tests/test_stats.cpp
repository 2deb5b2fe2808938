#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mg/report_io.hpp"
#include "mg/rng.hpp"
#include "mg/stats.hpp"

using namespace mg;

TEST_CASE("moment accumulator against direct sums") {
    const std::vector<double> xs = {1.5, -2.0, 0.25, 7.0, 7.0, -3.5, 0.0, 4.25};
    MomentAccumulator acc;
    for (double x : xs) acc.add(x);

    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        m2 += (x - mean) * (x - mean);
        m4 += std::pow(x - mean, 4);
    }
    const double var = m2 / xs.size();
    CHECK_THAT(acc.mean(), Catch::Matchers::WithinRel(mean, 1e-12));
    CHECK_THAT(acc.variance(), Catch::Matchers::WithinRel(var, 1e-12));
    CHECK_THAT(acc.excess_kurtosis(),
               Catch::Matchers::WithinRel((m4 / xs.size()) / (var * var) - 3.0, 1e-10));
}

TEST_CASE("moment accumulator merge equals bulk accumulation") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> xs(200);
        for (auto& x : xs) x = rng.gaussian(1.0, 2.0);
        const std::size_t cut = 1 + rng.uniform_below(198);
        MomentAccumulator left, right, bulk;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            bulk.add(xs[i]);
            (i < cut ? left : right).add(xs[i]);
        }
        left.merge(right);
        REQUIRE(left.count() == bulk.count());
        REQUIRE_THAT(left.mean(), Catch::Matchers::WithinRel(bulk.mean(), 1e-10));
        REQUIRE_THAT(left.variance(), Catch::Matchers::WithinRel(bulk.variance(), 1e-10));
        REQUIRE_THAT(left.excess_kurtosis(),
                     Catch::Matchers::WithinAbs(bulk.excess_kurtosis(), 1e-8));
    }
}

TEST_CASE("statistics are translation invariant; variance scales as c^2") {
    Rng rng(5);
    std::vector<double> xs(5000), shifted(5000), scaled(5000);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = rng.gaussian(0.0, 3.0);
        shifted[i] = xs[i] + 1234.5;
        scaled[i] = xs[i] * 2.5;
    }
    const SeriesStats a = series_stats(xs);
    const SeriesStats b = series_stats(shifted);
    const SeriesStats c = series_stats(scaled);
    CHECK_THAT(b.variance, Catch::Matchers::WithinRel(a.variance, 1e-9));
    CHECK_THAT(b.excess_kurtosis, Catch::Matchers::WithinAbs(a.excess_kurtosis, 1e-7));
    CHECK_THAT(c.variance, Catch::Matchers::WithinRel(a.variance * 6.25, 1e-9));
}

TEST_CASE("running sigma: constant series is exactly zero") {
    const std::vector<double> constant(5000, 3.25);
    const auto sig = running_sigma(constant, 2000);
    REQUIRE(sig.size() == 3001);
    for (double s : sig) REQUIRE(s == 0.0);
}

TEST_CASE("running sigma: alternating series has unit deviation") {
    std::vector<double> alt(6000);
    for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? 1.0 : -1.0;
    const auto sig = running_sigma(alt, 2000);
    REQUIRE(sig.size() == 4001);
    for (double s : sig) REQUIRE_THAT(s, Catch::Matchers::WithinRel(1.0, 1e-12));
}

TEST_CASE("running sigma: white-noise windows track the true deviation") {
    Rng rng(202);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = rng.gaussian(0.0, 4.0);
    const auto sig = running_sigma(xs, 2000);
    REQUIRE(sig.size() == xs.size() - 2000 + 1);
    for (double s : sig) REQUIRE_THAT(s, Catch::Matchers::WithinRel(4.0, 0.05));
}

TEST_CASE("running sigma edge cases") {
    CHECK_THROWS_AS(running_sigma(std::vector<double>{1, 2, 3}, 1), std::invalid_argument);
    CHECK(running_sigma(std::vector<double>{1, 2, 3}, 5).empty());
}

TEST_CASE("variance decomposition") {
    Rng rng(11);
    std::vector<double> a(5000), eta(5000), zero(5000, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.gaussian(0.0, 2.0);
        eta[i] = rng.gaussian(0.0, 5.0);
    }

    const VarianceDecomposition indep = variance_decomposition(a, eta);
    CHECK(std::abs(indep.residual_rel) < 0.05);
    CHECK_THAT(indep.sigma_total * indep.sigma_total,
               Catch::Matchers::WithinRel(
                   indep.sigma_a * indep.sigma_a + indep.sigma_eta * indep.sigma_eta +
                       indep.residual_abs,
                   1e-9));

    const VarianceDecomposition silent = variance_decomposition(a, zero);
    CHECK(silent.sigma_total == silent.sigma_a);
    CHECK(silent.residual_abs == 0.0);

    const VarianceDecomposition same = variance_decomposition(a, a);
    // Perfect correlation: residual = 2 sigma^2.
    CHECK_THAT(same.residual_abs,
               Catch::Matchers::WithinRel(2.0 * same.sigma_a * same.sigma_a, 1e-9));

    CHECK_THROWS_AS(variance_decomposition(a, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("gaussianity checks") {
    Rng rng(21);
    std::vector<double> gauss(1000000);
    for (auto& x : gauss) x = rng.gaussian(0.0, 1.0);
    const GaussianityCheck g = gaussianity(gauss);
    CHECK(g.is_gaussian);
    CHECK(std::abs(g.excess_kurtosis) < 0.05);

    std::vector<double> twopoint(10000);
    for (std::size_t i = 0; i < twopoint.size(); ++i) twopoint[i] = i % 2 ? 1.0 : -1.0;
    const GaussianityCheck t = gaussianity(twopoint);
    CHECK_THAT(t.excess_kurtosis, Catch::Matchers::WithinRel(-2.0, 1e-9));
    CHECK_FALSE(t.is_gaussian);
}

TEST_CASE("histogram binning and totals") {
    Rng rng(33);
    std::vector<double> xs(20000);
    for (auto& x : xs) x = rng.gaussian(10.0, 2.0);
    const Histogram h = make_histogram(xs);
    CHECK(h.total() == xs.size());
    CHECK(h.bin_edges.size() == h.counts.size() + 1);
    for (std::size_t i = 1; i < h.bin_edges.size(); ++i)
        REQUIRE(h.bin_edges[i] > h.bin_edges[i - 1]);

    // Degenerate sample falls back to a single bin holding everything.
    const std::vector<double> flat(100, 5.0);
    const Histogram hf = make_histogram(flat);
    CHECK(hf.counts.size() == 1);
    CHECK(hf.total() == 100);

    CHECK_THROWS_AS(make_histogram(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(make_histogram(xs, std::vector<double>{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("histogram JSON round-trip preserves counts exactly") {
    Rng rng(44);
    std::vector<double> xs(3000);
    for (auto& x : xs) x = rng.gaussian(-4.0, 7.0);
    Histogram h = make_histogram(xs);
    h.has_overlay = true;
    h.overlay_mean = -4.0;
    h.overlay_std = 7.0;

    const json j = to_json(h);
    const Histogram back = histogram_from_json(json::parse(j.dump()));
    REQUIRE(back.counts == h.counts);
    REQUIRE(back.bin_edges == h.bin_edges);
    CHECK(back.has_overlay);
    CHECK(back.overlay_mean == h.overlay_mean);

    const std::string csv = histogram_csv(h);
    CHECK(csv.rfind("bin_lo,bin_hi,count\n", 0) == 0);
}
