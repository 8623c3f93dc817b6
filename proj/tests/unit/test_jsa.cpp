#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "spdc/errors.hpp"
#include "spdc/jsa.hpp"
#include "spdc/units.hpp"

using namespace spdc;
using testing::calibrated;
using testing::calibrated_jsa;
using testing::default_grid;

namespace {

// Independent normalization check: direct double loop over cells.
double direct_norm(const JointAmplitude& f) {
    const auto& g = f.grid;
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size1(); ++i) {
        const double w1 = units::omega_per_nm(g.lambda1()[i]) * g.step1();
        for (std::size_t j = 0; j < g.size2(); ++j) {
            const double w2 = units::omega_per_nm(g.lambda2()[j]) * g.step2();
            sum += std::norm(f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) * w1 * w2;
        }
    }
    return sum;
}

Distribution1D sampled_gaussian(double fwhm, double center, double step) {
    Distribution1D d;
    const double s = fwhm / units::fwhm_per_sigma;
    for (double x = center - 30; x <= center + 30; x += step) {
        d.abscissa.push_back(x);
        d.weights.push_back(std::exp(-(x - center) * (x - center) / (2 * s * s)));
    }
    return d;
}

}  // namespace

TEST_CASE("build_jsa is normalized for a range of parameters") {
    const auto grid = default_grid();
    for (auto [we, wo, wp] : {std::tuple{10.0, 6.0, 1.6}, {20.0, 6.0, 1.6}, {8.0, 8.0, 2.5}, {30.0, 5.9, 1.9}}) {
        const auto f = build_jsa(testing::params(we, wo, wp), grid);
        CHECK(f.normalized);
        CHECK(direct_norm(f) == doctest::Approx(1.0).epsilon(1e-9));
    }
    JsaParams sinc = testing::params(10, 6);
    sinc.model = JsaModel::gaussian_pump_sinc;
    CHECK(direct_norm(build_jsa(sinc, grid)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("build_jsa rejects bad widths and truncating grids") {
    CHECK_THROWS_AS(build_jsa(testing::params(-1, 6), default_grid()), InvalidArgument);
    CHECK_THROWS_AS(build_jsa(testing::params(10, 6), SpectralGrid::uniform(778, 784, 0.25)), InvalidArgument);
}

TEST_CASE("symmetric parameters give a symmetric amplitude") {
    JsaParams p = testing::params(8, 8, 1.6);
    p.center_o = p.center_e;
    p.pump_center = p.center_e / 2;
    const auto f = build_jsa(p, default_grid());
    CHECK((f.values - f.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const auto g = swap_arms(f);
    CHECK(g.values == f.values);
    CHECK(std::abs(overlap_integral(f, g, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("swap_arms is an involution and transposes the intensity") {
    const auto& f = calibrated_jsa();
    const auto g = swap_arms(f);
    CHECK(swap_arms(g).values == f.values);
    CHECK(joint_intensity(g) == joint_intensity(f).transpose());
    CHECK(g.norm_squared() == doctest::Approx(1.0).epsilon(1e-9));
    const auto [m1, m2] = marginal_fwhms(g);
    CHECK(m1 == doctest::Approx(5.8).epsilon(0.02));
    CHECK(m2 == doctest::Approx(9.2).epsilon(0.02));

    const auto rect = build_jsa(testing::params(10, 6), SpectralGrid::uniform(740, 822, 0.25, 741, 823, 0.25));
    CHECK_THROWS_AS(swap_arms(rect), InvalidArgument);
}

TEST_CASE("overlap integral properties") {
    const auto& f = calibrated_jsa();
    CHECK(overlap_integral(f, f, 0.0).real() == doctest::Approx(1.0).epsilon(1e-9));
    const auto g = swap_arms(f);
    for (double tau : {25.0, 80.0, 200.0}) {
        const auto plus = overlap_integral(f, g, tau), minus = overlap_integral(f, g, -tau);
        CHECK(plus.real() == doctest::Approx(minus.real()).epsilon(1e-12));
        CHECK(plus.imag() == doctest::Approx(-minus.imag()).epsilon(1e-12));
        CHECK(std::abs(plus) == doctest::Approx(std::abs(minus)).epsilon(1e-9));
        CHECK(std::abs(plus) <= 1.0 + 1e-9);
    }
    JointAmplitude unnormalized = f;
    unnormalized.values *= 2.0;
    CHECK_THROWS_AS(overlap_integral(unnormalized, f, 0.0), InvalidArgument);
    const auto other = build_jsa(testing::params(10, 6), SpectralGrid::uniform(740, 822, 0.5));
    CHECK_THROWS_AS(overlap_integral(other, f, 0.0), InvalidArgument);
}

TEST_CASE("swap overlap converges under grid refinement") {
    const auto& p = calibrated().params;
    const auto coarse = build_jsa(p, default_grid());
    const auto fine = build_jsa(p, SpectralGrid::uniform(740.0, 822.0, 0.0625));
    const double o_coarse = std::abs(overlap_integral(coarse, swap_arms(coarse), 0.0));
    const double o_fine = std::abs(overlap_integral(fine, swap_arms(fine), 0.0));
    CHECK(o_coarse < 1.0);
    CHECK(o_coarse == doctest::Approx(o_fine).epsilon(1e-3));
}

TEST_CASE("swap overlap decreases with the width gap") {
    double previous = 2.0;
    for (double gap : {0.0, 2.0, 4.0, 6.0, 8.0}) {
        auto p = testing::params(6.0 + gap, 6.0, 1.6);
        p.center_o = p.center_e;
        p.pump_center = p.center_e / 2;
        const auto f = build_jsa(p, default_grid());
        const double o = std::abs(overlap_integral(f, swap_arms(f), 0.0));
        if (gap == 0.0) CHECK(o == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(o < previous);
        previous = o;
    }
}

TEST_CASE("calibrated amplitude peaks at the centers") {
    const auto& f = calibrated_jsa();
    Eigen::Index i = 0, j = 0;
    joint_intensity(f).maxCoeff(&i, &j);
    CHECK(std::abs(f.grid.lambda1()[static_cast<std::size_t>(i)] - 781.55) <= 0.25);
    CHECK(std::abs(f.grid.lambda2()[static_cast<std::size_t>(j)] - 780.19) <= 0.25);
    const auto probs = cell_probabilities(f);
    CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("marginals conserve mass and match the calibration targets") {
    const auto& f = calibrated_jsa();
    const auto I = joint_intensity(f);
    const auto m = marginal_distribution(I, Axis::one, f.grid);
    CHECK(m.total() == doctest::Approx(I.sum()).epsilon(1e-12));
    const auto probs = cell_probabilities(f);
    CHECK(fwhm_of(marginal_distribution(probs, Axis::one, f.grid)).fwhm == doctest::Approx(9.2).epsilon(0.02));
    CHECK(fwhm_of(marginal_distribution(probs, Axis::two, f.grid)).fwhm == doctest::Approx(5.8).epsilon(0.02));
    CHECK_THROWS_AS(marginal_distribution(Eigen::MatrixXd::Ones(3, 3), Axis::one, f.grid), InvalidArgument);
}

TEST_CASE("marginal widths follow the analytic Gaussian convolution") {
    const auto grid = default_grid();
    for (auto [we, wo, wp] : {std::tuple{10.0, 6.0, 1.6}, {20.0, 7.0, 2.0}, {14.0, 9.0, 3.0}}) {
        const auto p = testing::params(we, wo, wp);
        const auto v = testing::gaussian_variances(p);
        const auto [m1, m2] = marginal_fwhms(build_jsa(p, grid));
        CHECK(m1 == doctest::Approx(units::fwhm_nm_from_sigma_omega(std::sqrt(v.var1), p.center_e)).epsilon(0.01));
        CHECK(m2 == doctest::Approx(units::fwhm_nm_from_sigma_omega(std::sqrt(v.var2), p.center_o)).epsilon(0.01));
    }
    // Finite-difference sensitivity against the analytic derivative.
    const double h = 0.2;
    auto numeric = [&](double we) { return marginal_fwhms(build_jsa(testing::params(we, 6.0), grid)).first; };
    auto analytic = [&](double we) {
        const auto p = testing::params(we, 6.0);
        return units::fwhm_nm_from_sigma_omega(std::sqrt(testing::gaussian_variances(p).var1), p.center_e);
    };
    const double dn = (numeric(12.0 + h) - numeric(12.0 - h)) / (2 * h);
    const double da = (analytic(12.0 + h) - analytic(12.0 - h)) / (2 * h);
    CHECK(dn == doctest::Approx(da).epsilon(0.01));
}

TEST_CASE("fwhm_of on exact, degenerate and noisy data") {
    CHECK(fwhm_of(sampled_gaussian(8.30, 780.0, 0.25)).fwhm == doctest::Approx(8.30).epsilon(0.01 / 8.3));

    Distribution1D spike;
    for (int i = 0; i < 40; ++i) {
        spike.abscissa.push_back(760 + i);
        spike.weights.push_back(i == 20 ? 1.0 : 0.0);
    }
    CHECK_THROWS_AS(fwhm_of(spike), NumericalError);

    Distribution1D flat = spike;
    std::fill(flat.weights.begin(), flat.weights.end(), 1.0);
    CHECK_THROWS_AS(fwhm_of(flat), NumericalError);

    // Poisson draw of 10^4 counts from the same shape.
    auto d = sampled_gaussian(8.30, 780.0, 0.5);
    const double total = d.total();
    std::mt19937_64 rng(12345);
    for (auto& w : d.weights) w = static_cast<double>(std::poisson_distribution<int>(1e4 * w / total)(rng));
    CHECK(fwhm_of(d).fwhm == doctest::Approx(8.30).epsilon(0.05));
}

TEST_CASE("calibration reproduces the target marginals") {
    const auto& c = calibrated();
    CHECK(c.residual <= 0.005);
    const auto [m1, m2] = marginal_fwhms(build_jsa(c.params, default_grid()));
    CHECK(m1 == doctest::Approx(9.2).epsilon(0.005));
    CHECK(m2 == doctest::Approx(5.8).epsilon(0.005));
    CHECK(c.params.center_e == 781.55);
    CHECK(c.params.center_o == 780.19);
    MESSAGE("pump width used: " << c.params.pump_width << " nm (adjusted: " << c.pump_adjusted << ")");
}

TEST_CASE("calibration with the pump width held fixed") {
    MarginalTargets t;
    CalibrationOptions strict;
    strict.allow_pump_adjustment = false;
    CHECK_THROWS_AS(calibrate_to_marginals(t, default_grid(), strict), NumericalError);
}

TEST_CASE("calibration round trip from known parameters") {
    const auto truth = testing::params(20.0, 6.0, 1.6);
    const auto [m1, m2] = marginal_fwhms(build_jsa(truth, default_grid()));
    const auto c = calibrate_to_marginals({m1, m2, truth.center_e, truth.center_o, truth.pump_width}, default_grid());
    CHECK_FALSE(c.pump_adjusted);
    CHECK(c.params.width_e == doctest::Approx(20.0).epsilon(0.005));
    CHECK(c.params.width_o == doctest::Approx(6.0).epsilon(0.005));
}

TEST_CASE("equal marginal targets give equal factor widths") {
    const auto c = calibrate_to_marginals({7.0, 7.0, 781.0, 781.0, 1.6}, default_grid());
    CHECK(c.params.width_e == doctest::Approx(c.params.width_o).epsilon(0.01));
}

TEST_CASE("spectral filters") {
    const auto& f = calibrated_jsa();
    const auto id = apply_filter(f, SpectralFilter::identity(), SpectralFilter::identity());
    CHECK(id.survival == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((id.amplitude.values - f.values).cwiseAbs().maxCoeff() < 1e-12);

    // A one-bin rectangle on each arm keeps exactly one cell.
    const double l1 = f.grid.lambda1()[160], l2 = f.grid.lambda2()[158];
    const auto one = apply_filter(f, SpectralFilter::rectangular(l1, 0.25), SpectralFilter::rectangular(l2, 0.25));
    CHECK(one.survival == doctest::Approx(cell_probabilities(f)(160, 158)).epsilon(1e-9));

    const auto narrow = apply_filter(f, SpectralFilter::gaussian(781.0, 3.0), SpectralFilter::gaussian(781.0, 3.0));
    const auto& a = narrow.amplitude;
    CHECK(std::abs(overlap_integral(a, swap_arms(a), 0.0)) > std::abs(overlap_integral(f, swap_arms(f), 0.0)));

    CHECK_THROWS_AS(apply_filter(f, SpectralFilter::rectangular(700.0, 1.0), SpectralFilter::identity()),
                    NumericalError);
    CHECK_THROWS_AS(SpectralFilter::gaussian(780.0, -1.0).validate(), InvalidArgument);
    for (double l : {770.0, 780.0, 790.0}) {
        const double t = SpectralFilter::gaussian(780.0, 3.0).transmission(l);
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
}
