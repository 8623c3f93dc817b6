#include "spdc/spectral_grid.hpp"

#include <cmath>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

std::vector<double> uniform_axis(double start, double stop, double step) {
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
        throw InvalidArgument("uniform_axis: need finite start <= stop and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-3)) + 1;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = start + static_cast<double>(i) * step;
    return values;
}

bool is_uniform_axis(const std::vector<double>& values) {
    if (values.size() < 2) return false;
    const double step = values[1] - values[0];
    if (!(step > 0.0)) return false;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double d = values[i] - values[i - 1];
        if (!(d > 0.0) || std::abs(d - step) > 1e-6 * step) return false;
    }
    return true;
}

namespace {

void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.size() < SpectralGrid::min_points) {
        throw InvalidArgument(std::string("SpectralGrid: ") + name + " needs at least " +
                              std::to_string(SpectralGrid::min_points) + " points");
    }
    if (!is_uniform_axis(axis)) {
        throw InvalidArgument(std::string("SpectralGrid: ") + name +
                              " must be strictly increasing with a uniform step");
    }
    if (!(axis.front() > 0.0)) {
        throw InvalidArgument(std::string("SpectralGrid: ") + name + " wavelengths must be positive");
    }
}

Eigen::VectorXd omega_of(const std::vector<double>& axis) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(axis.size()));
    for (std::size_t i = 0; i < axis.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = units::omega_from_wavelength(axis[i]);
    return out;
}

Eigen::VectorXd weight_of(const std::vector<double>& axis) {
    const double step = axis[1] - axis[0];
    Eigen::VectorXd out(static_cast<Eigen::Index>(axis.size()));
    for (std::size_t i = 0; i < axis.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = units::omega_per_nm(axis[i]) * step;
    return out;
}

}  // namespace

SpectralGrid::SpectralGrid(std::vector<double> lambda1, std::vector<double> lambda2)
    : lambda1_(std::move(lambda1)), lambda2_(std::move(lambda2)) {
    check_axis(lambda1_, "lambda1");
    check_axis(lambda2_, "lambda2");
}

SpectralGrid SpectralGrid::uniform(double start, double stop, double step) {
    auto axis = uniform_axis(start, stop, step);
    return SpectralGrid(axis, axis);
}

SpectralGrid SpectralGrid::uniform(double start1, double stop1, double step1, double start2,
                                   double stop2, double step2) {
    return SpectralGrid(uniform_axis(start1, stop1, step1), uniform_axis(start2, stop2, step2));
}

Eigen::VectorXd SpectralGrid::omega1() const { return omega_of(lambda1_); }
Eigen::VectorXd SpectralGrid::omega2() const { return omega_of(lambda2_); }
Eigen::VectorXd SpectralGrid::weight1() const { return weight_of(lambda1_); }
Eigen::VectorXd SpectralGrid::weight2() const { return weight_of(lambda2_); }

Eigen::MatrixXd SpectralGrid::cell_areas() const { return weight1() * weight2().transpose(); }

}  // namespace spdc
