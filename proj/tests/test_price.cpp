#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mg/price.hpp"
#include "mg/rng.hpp"

using namespace mg;

namespace {

MeritLadder sample_ladder() {
    return MeritLadder::from_steps(
        {{200, 30}, {300, 45}, {300, 65}, {300, 90}, {250, 130}, {150, 180}, {100, 250}},
        {{200, -25}, {300, -40}, {300, -60}, {300, -85}, {250, -120}, {150, -170}, {100, -240}});
}

/// Ladder whose smoothed marginal equals p(x) = k x (positive side) between
/// the outermost step midpoints: step prices k * midpoint on an even grid.
/// The vanishing leading step pins the interpolant through the origin, so the
/// constant edge extension contributes nothing.
MeritLadder linear_marginal_ladder(double k, double cap_per_step, int steps) {
    std::vector<MeritStep> pos, neg;
    pos.push_back({1e-9, 0.0});
    neg.push_back({1e-9, 0.0});
    for (int i = 0; i < steps; ++i) {
        const double mid = (i + 0.5) * cap_per_step;
        pos.push_back({cap_per_step, k * mid});
        neg.push_back({cap_per_step, -k * mid});
    }
    return MeritLadder::from_steps(pos, neg);
}

MeritLadder cubic_marginal_ladder(double k, double cap_per_step, int steps) {
    std::vector<MeritStep> pos;
    pos.push_back({1e-9, 0.0});
    for (int i = 0; i < steps; ++i) {
        const double mid = (i + 0.5) * cap_per_step;
        pos.push_back({cap_per_step, k * mid * mid * mid});
    }
    return MeritLadder::from_steps(pos, {{cap_per_step * steps, -1.0}});
}

}  // namespace

TEST_CASE("eval_price analytic variants") {
    CHECK(eval_price(PriceSpec::identity(), 500.0) == 500.0);
    CHECK(eval_price(PriceSpec::quadratic(1.0 / 500), 100.0) == 120.0);
    CHECK(eval_price(PriceSpec::scaled_linear(2.0, 100.0), 50.0) == 1.0);
    CHECK(eval_price(PriceSpec::affine(500.0, 2.0, 100.0), 150.0) == 600.0);
}

TEST_CASE("merit ladder with constant marginal price is flat") {
    const MeritLadder flat = MeritLadder::from_steps({{100, 42}, {200, 42}}, {{300, -17}});
    // Analytic oracle: (integral of a constant c over (0,x)) / x = c.
    for (double x : {1.0, 55.5, 123.0, 299.0}) CHECK_THAT(flat.average_price(x),
                                                          Catch::Matchers::WithinRel(42.0, 1e-12));
    for (double x : {-1.0, -250.0}) CHECK_THAT(flat.average_price(x),
                                               Catch::Matchers::WithinRel(-17.0, 1e-12));
    CHECK(flat.average_price(0.0) == 0.5 * (42.0 - 17.0));
}

TEST_CASE("merit ladder piecewise averages and exhaustion") {
    const MeritLadder l = sample_ladder();
    // First step only: R = p of step one.
    CHECK_THAT(l.average_price(150.0), Catch::Matchers::WithinRel(30.0, 1e-12));
    // Two steps deep: (200*30 + 100*45) / 300.
    CHECK_THAT(l.average_price(300.0), Catch::Matchers::WithinRel((200.0 * 30 + 100 * 45) / 300.0,
                                                                  1e-12));
    CHECK_THAT(l.average_price(-250.0),
               Catch::Matchers::WithinRel(-(200.0 * 25 + 50 * 40) / 250.0, 1e-12));

    CHECK(l.positive_capacity() == 1600.0);
    CHECK_THROWS_AS(l.average_price(1600.5), ReserveExhausted);
    CHECK_THROWS_AS(l.average_price(-1700.0), ReserveExhausted);
    try {
        l.average_price(1800.0);
        FAIL("expected ReserveExhausted");
    } catch (const ReserveExhausted& e) {
        CHECK(e.requested == 1800.0);
        CHECK(e.capacity == 1600.0);
        CHECK_THAT(e.overshoot, Catch::Matchers::WithinRel(200.0, 1e-12));
    }
}

TEST_CASE("merit ladder validation") {
    CHECK_THROWS_AS(MeritLadder::from_steps({{100, 50}, {100, 40}}, {}), ConfigError);
    CHECK_THROWS_AS(MeritLadder::from_steps({{0, 50}}, {}), ConfigError);
    CHECK_THROWS_AS(MeritLadder::from_steps({}, {}), ConfigError);
    CHECK_THROWS_AS(MeritLadder::from_steps({}, {{100, -10}, {100, -5}}), ConfigError);
}

TEST_CASE("merit ladder csv loading") {
    std::istringstream csv(
        "sign,capacity_mw,marginal_price\n"
        "+,100,10\n"
        "+,100,20\n"
        "-,50,-5\n"
        "# comment line\n"
        "-,50,-15\n");
    const MeritLadder l = MeritLadder::from_csv_stream(csv);
    CHECK(l.positive_capacity() == 200.0);
    CHECK(l.negative_capacity() == 100.0);
    CHECK_THAT(l.average_price(200.0), Catch::Matchers::WithinRel(15.0, 1e-12));

    std::istringstream bad("+,100\n");
    CHECK_THROWS_AS(MeritLadder::from_csv_stream(bad), ConfigError);
}

TEST_CASE("apply_cutoff branches") {
    CHECK(apply_cutoff(1.0, +1.0, 1.0, 1.25) == 1.25);
    CHECK(apply_cutoff(-2.0, -1.0, 1.0, 1.25) == -2.0);
    CHECK(apply_cutoff(-1.0, -1.0, 1.0, 1.25) == -1.25);
    CHECK(apply_cutoff(0.7, 0.0, 1.0, 1.25) == 0.7);  // x = 0 passes through
    CHECK(apply_cutoff(3.0, +1.0, 1.0, 1.25) == 3.0);
}

TEST_CASE("cutoff spec composes with inner prices") {
    const PriceSpec spec = PriceSpec::cutoff(PriceSpec::identity(), 100.0, 1.25);
    CHECK(eval_price(spec, 10.0) == 125.0);
    CHECK(eval_price(spec, 500.0) == 500.0);
    CHECK(eval_price(spec, -10.0) == -125.0);
    CHECK(eval_price(spec, -500.0) == -500.0);
    CHECK(eval_price(spec, 0.0) == 0.0);
}

TEST_CASE("monotonicity of every variant on random grids") {
    Rng rng(2024);
    const MeritLadder ladder = sample_ladder();
    for (int trial = 0; trial < 1000; ++trial) {
        PriceSpec spec;
        switch (trial % 5) {
            case 0: spec = PriceSpec::identity(); break;
            case 1: spec = PriceSpec::scaled_linear(0.1 + rng.uniform01(), 1 + rng.uniform01() * 9); break;
            case 2: spec = PriceSpec::affine(rng.uniform01() * 100, 0.1 + rng.uniform01(),
                                             rng.uniform01() * 50); break;
            case 3: spec = PriceSpec::merit(ladder); break;
            default:
                spec = PriceSpec::cutoff(PriceSpec::affine(rng.uniform01() * 100, 0.5 + rng.uniform01(),
                                                           rng.uniform01() * 40),
                                         rng.uniform01() * 80, 1.0 + rng.uniform01());
        }
        const PriceDomain dom = price_domain(spec);
        const double lo = dom.bounded ? dom.lo : -500.0;
        const double hi = dom.bounded ? dom.hi : 500.0;
        double prev_x = lo, prev_r = eval_price(spec, lo);
        for (int k = 1; k <= 64; ++k) {
            const double x = lo + (hi - lo) * (k + rng.uniform01() * 0.5) / 65.0;
            if (x <= prev_x) continue;
            const double r = eval_price(spec, x);
            REQUIRE(r >= prev_r - 1e-9);
            prev_x = x;
            prev_r = r;
        }
    }
}

TEST_CASE("merit bound: average price never beats the marginal") {
    const MeritLadder l = sample_ladder();
    Rng rng(31);
    for (int k = 0; k < 500; ++k) {
        const double x = rng.uniform01() * l.positive_capacity() * 0.999 + 0.5;
        REQUIRE(l.average_price(x) <= l.marginal_price(x) + 1e-12);
        const double y = -(rng.uniform01() * l.negative_capacity() * 0.999 + 0.5);
        REQUIRE(l.average_price(y) >= l.marginal_price(y) - 1e-12);
    }
}

TEST_CASE("derivative_check on a linear marginal: dR = k/2, flat curvature") {
    const double k = 0.4;
    const MeritLadder l = linear_marginal_ladder(k, 10.0, 40);  // capacity 400 per side
    const double h = 0.5;
    for (double x : {60.0, 150.0, 290.0}) {
        const DerivativeCheck d = derivative_check(l, x, h);
        // Analytic: R(x) = k x / 2.
        CHECK_THAT(d.dR, Catch::Matchers::WithinRel(k / 2.0, 1e-6));
        CHECK_THAT(d.d2R, Catch::Matchers::WithinAbs(0.0, 1e-9));
        CHECK_FALSE(d.convexity_condition_holds);  // p' = k < 2p/x = 2k
    }
}

TEST_CASE("derivative_check on a cubic marginal: condition holds, d2R > 0") {
    const MeritLadder l = cubic_marginal_ladder(1e-4, 2.0, 200);  // capacity 400
    const double h = 1.0;
    for (double x : {100.0, 200.0, 300.0}) {
        const DerivativeCheck d = derivative_check(l, x, h);
        // Analytic: R = k x^3 / 4, R' = 3k x^2 / 4, R'' = 3k x / 2.
        CHECK(d.convexity_condition_holds);  // 3k x^2 > 2 k x^2
        CHECK(d.d2R > 0.0);
        CHECK_THAT(d.d2R, Catch::Matchers::WithinRel(1.5e-4 * x, 0.02));
        CHECK_THAT(d.dR, Catch::Matchers::WithinRel(0.75e-4 * x * x, 0.02));
    }
}

TEST_CASE("derivative_check on a constant marginal: everything flat") {
    const MeritLadder flat = MeritLadder::from_steps({{400, 55}}, {{400, -55}});
    const DerivativeCheck d = derivative_check(flat, 200.0, 1.0);
    CHECK_THAT(d.dR, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(d.d2R, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_FALSE(d.convexity_condition_holds);
}

TEST_CASE("derivative_check input validation") {
    const MeritLadder l = sample_ladder();
    CHECK_THROWS_AS(derivative_check(l, 100.0, 0.0), ConfigError);
    CHECK_THROWS_AS(derivative_check(l, 1599.9, 1.0), ReserveExhausted);
    CHECK(default_fd_step(l) == Catch::Approx(3.2));
}

TEST_CASE("broadening: affine price is width-independent") {
    const PriceSpec affine = PriceSpec::affine(100.0, 2.0, 50.0);
    const std::vector<double> widths = {1, 2, 4};
    for (auto dist : {BroadeningDist::gaussian, BroadeningDist::uniform}) {
        const auto rows = broadening_expectation(affine, 50.0, widths, dist);
        REQUIRE(rows.size() == 3);
        for (const auto& [w, er] : rows)
            CHECK_THAT(er, Catch::Matchers::WithinRel(100.0, 1e-6));
    }
}

TEST_CASE("broadening: quadratic matches the closed form R(a*) + c2 w^2") {
    const double c2 = 1.0 / 500;
    const PriceSpec quad = PriceSpec::quadratic(c2);
    const double a_star = 80.0;
    const std::vector<double> widths = {1, 2, 4};
    for (auto dist : {BroadeningDist::gaussian, BroadeningDist::uniform}) {
        const auto rows = broadening_expectation(quad, a_star, widths, dist);
        double prev = -1e300;
        for (const auto& [w, er] : rows) {
            const double closed = eval_price(quad, a_star) + c2 * w * w;
            CHECK_THAT(er, Catch::Matchers::WithinRel(closed, 1e-6));
            CHECK(er > prev);
            prev = er;
        }
    }
}

TEST_CASE("broadening: negative curvature decreases, cutoff kink increases") {
    const PriceSpec concave = PriceSpec::quadratic(-1.0 / 500);
    const std::vector<double> widths = {1, 2, 4, 8};
    const auto down = broadening_expectation(concave, 50.0, widths, BroadeningDist::gaussian);
    for (std::size_t i = 1; i < down.size(); ++i) REQUIRE(down[i].second < down[i - 1].second);

    // Cut-off wrapped affine with a* exactly at the kink: flat to the left,
    // rising to the right, so broadening must raise the expectation.
    const double a_star = 100.0;
    const PriceSpec kinked =
        PriceSpec::cutoff(PriceSpec::affine(100.0, 1.0, a_star), 100.0 / 1.25, 1.25);
    const auto up = broadening_expectation(kinked, a_star, widths, BroadeningDist::gaussian);
    for (std::size_t i = 1; i < up.size(); ++i) REQUIRE(up[i].second > up[i - 1].second);
}

TEST_CASE("broadening: width validation and domain overflow") {
    const PriceSpec quad = PriceSpec::quadratic(0.01);
    std::vector<double> bad = {2, 1};
    CHECK_THROWS_AS(broadening_expectation(quad, 0.0, bad, BroadeningDist::gaussian), ConfigError);
    const PriceSpec merit = PriceSpec::merit(sample_ladder());
    std::vector<double> wide = {400.0};
    CHECK_THROWS_AS(broadening_expectation(merit, 0.0, wide, BroadeningDist::gaussian),
                    ReserveExhausted);
}
