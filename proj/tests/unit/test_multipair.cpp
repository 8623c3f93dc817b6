#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/multipair.hpp"

using namespace spdc;
using namespace spdc::multipair;

namespace {

constexpr double pi = std::numbers::pi;

// Max/min of R2 + R4 over a dense θ sweep.
double swept_visibility(const MultipairModel& m) {
    double hi = -1, lo = 1e300;
    for (int k = 0; k <= 3600; ++k) {
        const double theta = 2 * pi * k / 3600.0;
        const double r = r2_rate(m, theta) + r4_rate(m, theta);
        hi = std::max(hi, r);
        lo = std::min(lo, r);
    }
    return (hi - lo) / (hi + lo);
}

}  // namespace

TEST_CASE("pair and double-pair rates") {
    CHECK(r2_rate({0.1, 1.0}, 0.0) == doctest::Approx(0.1));
    CHECK(r2_rate({0.1, 1.0}, pi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r2_rate({0.1, 0.9}, pi / 2) == doctest::Approx(0.05));
    CHECK(r4_rate({0.1, 1.0}, 0.0) == doctest::Approx(1.5 * 0.01));
    CHECK(r4_rate({0.1, 1.0}, pi) == doctest::Approx(0.5 * 0.01));
    CHECK(r4_rate({0.0, 1.0}, 0.3) == 0.0);
    CHECK(MultipairModel{0.2, 1.0}.p_double() == doctest::Approx(0.02));
    for (double theta = -7; theta < 7; theta += 0.37) {
        const MultipairModel m{0.3, 0.7};
        CHECK(r2_rate(m, theta) >= 0);
        CHECK(r4_rate(m, theta) >= 0);
        CHECK(r2_rate(m, theta) + r4_rate(m, theta) ==
              doctest::Approx(r2_rate(m, theta + 2 * pi) + r4_rate(m, theta + 2 * pi)));
    }
    CHECK_THROWS_AS(MultipairModel({0.6, 1.0}).validate(), InvalidArgument);
    CHECK_THROWS_AS(MultipairModel({0.1, 1.2}).validate(), InvalidArgument);
}

TEST_CASE("visibility with double pairs") {
    CHECK(visibility_with_double_pairs({0.0, 0.93}).exact == doctest::Approx(0.93));
    CHECK(visibility_with_double_pairs({0.1, 1.0}).exact == doctest::Approx(1.1 / 1.2).epsilon(1e-12));
    for (double p = 0.0; p <= 0.1 + 1e-12; p += 0.005) {
        const auto v = visibility_with_double_pairs({p, 1.0});
        CHECK(std::abs(v.exact - (1 - p)) == doctest::Approx(2 * p * p / (1 + 2 * p)).epsilon(1e-9));
        CHECK(std::abs(v.exact - (1 - p)) <= 2 * p * p + 1e-15);
        CHECK(v.linear == doctest::Approx(1 - p));
        CHECK(v.first_order == doctest::Approx(1 - p));
    }
    double prev = 2;
    for (double p = 0.0; p <= 0.5; p += 0.05) {
        const double v = visibility_with_double_pairs({p, 0.8}).exact;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("closed-form visibility matches a swept theta") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> vd(0.0, 1.0), pd(0.0, 0.5);
    for (int k = 0; k < 20; ++k) {
        const MultipairModel m{pd(rng), vd(rng)};
        CHECK(visibility_with_double_pairs(m).exact == doctest::Approx(swept_visibility(m)).epsilon(1e-12));
    }
}

TEST_CASE("inverse visibility relation") {
    const double p = pair_probability_for_visibility(0.95, 0.88);
    CHECK(visibility_with_double_pairs({p, 0.95}).exact == doctest::Approx(0.88).epsilon(1e-12));
    CHECK(pair_probability_for_visibility(0.9, 0.9) == 0.0);
    CHECK_THROWS_AS(pair_probability_for_visibility(0.8, 0.85), InvalidArgument);
}

TEST_CASE("pair probability from singles") {
    CHECK(p_pair_from_singles(1.0e6, {0.113}, 76e6) == doctest::Approx(0.1165).epsilon(1e-3));
    CHECK(p_pair_from_singles(0.0, {0.113}, 76e6) == 0.0);
    CHECK(p_pair_from_singles(76e6, {1.0}, 76e6) == doctest::Approx(1.0));
    CHECK_THROWS_AS(p_pair_from_singles(50e6, {0.113}, 76e6), InvalidArgument);
    CHECK_THROWS_AS(p_pair_from_singles(1e6, {0.0}, 76e6), InvalidArgument);
}

TEST_CASE("consecutive-pulse rate") {
    CHECK(accidental_rate(1e6, 1e6, 76e6) == doctest::Approx(13158).epsilon(1e-4));
    CHECK(accidental_rate(0.0, 1e6, 76e6) == 0.0);
    CHECK(accidental_rate(2e6, 2e6, 76e6) == doctest::Approx(4 * accidental_rate(1e6, 1e6, 76e6)));
}

TEST_CASE("correction bounds") {
    const auto none = correction_bounds({0.9, 0.1, 0.0});
    CHECK(none.v_low == none.v_raw);
    CHECK(none.v_high == none.v_raw);

    const auto band = correction_bounds({0.934, 0.066, 0.0567});
    CHECK(band.v_raw == doctest::Approx(0.868));
    CHECK(std::abs(band.v_low - 0.920) <= 0.002);
    CHECK(std::abs(band.v_high - 0.979) <= 0.002);

    const auto flat = correction_bounds({0.5, 0.5, 0.1});
    CHECK(flat.v_raw == 0.0);
    CHECK(flat.v_low == 0.0);
    CHECK(flat.v_high == 0.0);

    // Monotone in the background and collapsing as c_acc → 0.
    const CorrectionInput in{0.9, 0.1, 0.08};
    double prev = -1;
    for (double b = 0; b <= 0.08; b += 0.01) {
        const double v = corrected_visibility(in, b);
        CHECK(v >= prev);
        prev = v;
    }
    for (double acc : {0.04, 0.004, 0.0004}) {
        const auto b = correction_bounds({0.9, 0.1, acc});
        CHECK(b.v_high - b.v_low <= 2 * acc);
    }

    try {
        correction_bounds({0.9, 0.05, 0.08});
        FAIL("expected over-subtraction error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("upper bound") != std::string::npos);
    }
    try {
        correction_bounds({0.9, 0.03, 0.08});
        FAIL("expected over-subtraction error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("lower and upper") != std::string::npos);
    }
    const auto allowed = correction_bounds({0.9, 0.05, 0.08}, OverSubtraction::allow);
    CHECK(allowed.over_subtracted);
    CHECK(allowed.v_high > 1.0);
    CHECK_THROWS_AS(correction_bounds({0.1, 0.9, 0.0}), InvalidArgument);
}

TEST_CASE("consistency loop: the corrected band contains the intrinsic visibility") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pd(0.01, 0.1);
    for (int trial = 0; trial < 10; ++trial) {
        const double p = pd(rng);
        const MultipairModel m{p, 1.0};
        const double pulses = 2e6 / (p * p);  // keeps even the weakest setting well above 1e5 counts
        const double mu_max = pulses * (r2_rate(m, 0) + r4_rate(m, 0));
        const double mu_min = pulses * (r2_rate(m, pi) + r4_rate(m, pi));
        const double mu_acc = pulses * p * p;
        const double c_max = static_cast<double>(std::poisson_distribution<long long>(mu_max)(rng));
        const double c_min = static_cast<double>(std::poisson_distribution<long long>(mu_min)(rng));
        const double c_acc = static_cast<double>(std::poisson_distribution<long long>(mu_acc)(rng));
        CHECK(c_max + c_min >= 1e5);
        const auto b = correction_bounds({c_max, c_min, c_acc}, OverSubtraction::allow);
        // Poisson error of v_low by first-order propagation.
        const double d = c_max + c_min - c_acc;
        const double dv_dmax = (d - (c_max - c_min)) / (d * d);
        const double dv_dmin = (-d - (c_max - c_min)) / (d * d);
        const double dv_dacc = (c_max - c_min) / (d * d);
        const double se = std::sqrt(dv_dmax * dv_dmax * c_max + dv_dmin * dv_dmin * c_min + dv_dacc * dv_dacc * c_acc);
        CHECK(b.v_low - 3 * se <= 1.0);
        CHECK(b.v_high + 3 * se >= 1.0);
    }
}

TEST_CASE("power fits") {
    std::vector<PowerPoint> line;
    for (double mw = 0; mw <= 900; mw += 50) line.push_back({mw, 0.976 - 0.000177 * mw});
    const auto fit = fit_visibility_vs_power(line);
    CHECK(fit.slope_pct_per_mw == doctest::Approx(0.0177).epsilon(1e-12));
    CHECK(fit.v_max_at_zero == doctest::Approx(0.976).epsilon(1e-12));
    CHECK(fit.residual_rms < 1e-12);

    CHECK_THROWS_AS(fit_visibility_vs_power({{100, 0.9}, {100, 0.8}, {100, 0.7}}), InvalidArgument);
    CHECK_THROWS_AS(fit_visibility_vs_power({{100, 0.9}, {200, 0.8}}), InvalidArgument);
}

TEST_CASE("slope of the exact double-pair visibility over p in [0, 0.08]") {
    std::vector<PowerPoint> pts;
    for (int k = 0; k <= 80; ++k) {
        const double p = k * 0.001;
        pts.push_back({p, visibility_with_double_pairs({p, 1.0}).exact});
    }
    const double slope = -fit_visibility_vs_power(pts).slope_pct_per_mw / 100.0;  // dV/dp
    MESSAGE("dV/dp = " << slope);
    CHECK(slope >= -1.05);
    CHECK(slope <= -0.90);
}

TEST_CASE("band solution reproduces the raw visibility and the lower bound") {
    const auto s = solve_from_corrected_band(0.868, 0.920);
    CHECK(visibility_with_double_pairs({s.p_pair, s.v_intrinsic}).exact == doctest::Approx(0.868).epsilon(1e-12));
    const double c_max = (1 + s.v_intrinsic) / 4 + 0.75 * s.p_pair;
    const double c_min = (1 - s.v_intrinsic) / 4 + 0.25 * s.p_pair;
    const auto b = correction_bounds({c_max, c_min, 0.5 * s.p_pair}, OverSubtraction::allow);
    CHECK(b.v_low == doctest::Approx(0.920).epsilon(1e-12));
    CHECK(s.accidental_fraction == doctest::Approx(0.5 * s.p_pair / (c_max + c_min)).epsilon(1e-12));
}
