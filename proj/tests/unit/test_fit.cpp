#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spdc/errors.hpp"
#include "spdc/fit.hpp"

using namespace spdc;

namespace {

std::vector<double> gaussian(const std::vector<double>& x, double a, double c, double fwhm, double off) {
    const double s = fwhm / 2.354820045030949;
    std::vector<double> y;
    for (double v : x) y.push_back(off + a * std::exp(-(v - c) * (v - c) / (2 * s * s)));
    return y;
}

std::vector<double> range(double a, double b, double step) {
    std::vector<double> x;
    for (double v = a; v <= b + 1e-9; v += step) x.push_back(v);
    return x;
}

}  // namespace

TEST_CASE("gaussian fit recovers exact parameters") {
    const auto x = range(760, 800, 0.5);
    const auto y = gaussian(x, 3.0, 781.3, 8.3, 0.2);
    const auto f = fit::fit_gaussian(x, y);
    CHECK(f.converged);
    CHECK(f.fwhm() == doctest::Approx(8.3).epsilon(1e-6));
    CHECK(f.center == doctest::Approx(781.3).epsilon(1e-9));
    CHECK(f.offset == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("gaussian fit of a dip") {
    const auto x = range(-300, 300, 10);
    const auto y = gaussian(x, -0.4, 0.0, 120.0, 0.5);
    const auto f = fit::fit_gaussian(x, y, fit::Polarity::automatic);
    CHECK(f.amplitude < 0);
    CHECK(f.fwhm() == doctest::Approx(120.0).epsilon(1e-6));
}

TEST_CASE("gaussian fit needs enough samples") {
    std::vector<double> x{1, 2, 3, 4}, y{0, 1, 1, 0};
    CHECK_THROWS_AS(fit::fit_gaussian(x, y), InvalidArgument);
}

TEST_CASE("line fit") {
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto l = fit::fit_line(x, y);
    CHECK(l.slope == doctest::Approx(2.0));
    CHECK(l.intercept == doctest::Approx(1.0));
    std::vector<double> same{2, 2, 2};
    CHECK_THROWS_AS(fit::fit_line(same, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("sinusoid fit") {
    std::vector<double> a, y;
    for (double deg = 0; deg < 180; deg += 10) {
        a.push_back(deg);
        y.push_back(2.0 + 1.5 * std::cos(2 * (deg - 30.0) * 3.141592653589793 / 180));
    }
    const auto s = fit::fit_sinusoid(a, y);
    CHECK(s.offset == doctest::Approx(2.0));
    CHECK(s.amplitude == doctest::Approx(1.5));
    CHECK(s.phase_deg == doctest::Approx(30.0));
    CHECK(s.visibility() == doctest::Approx(0.75));
    CHECK(s.residual_rms < 1e-12);
}

TEST_CASE("levenberg-marquardt on a quadratic bowl") {
    const auto r = fit::levenberg_marquardt(
        [](const Eigen::VectorXd& p) {
            Eigen::VectorXd out(2);
            out << p[0] - 3.0, 10.0 * (p[1] + 1.0);
            return out;
        },
        Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0));
    CHECK(r.converged);
    CHECK(r.parameters[0] == doctest::Approx(3.0));
    CHECK(r.parameters[1] == doctest::Approx(-1.0));
}
