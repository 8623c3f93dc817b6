#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace spdc {

/// Pair of uniform wavelength axes (nm) on which joint amplitudes are sampled.
/// Axis 1 is arm 1 (reflected port after compensation), axis 2 is arm 2.
class SpectralGrid {
public:
    static constexpr std::size_t min_points = 8;

    SpectralGrid(std::vector<double> lambda1, std::vector<double> lambda2);

    /// Square grid with identical axes from start to stop (inclusive) in steps.
    static SpectralGrid uniform(double start, double stop, double step);
    static SpectralGrid uniform(double start1, double stop1, double step1,
                                double start2, double stop2, double step2);

    const std::vector<double>& lambda1() const noexcept { return lambda1_; }
    const std::vector<double>& lambda2() const noexcept { return lambda2_; }
    std::size_t size1() const noexcept { return lambda1_.size(); }
    std::size_t size2() const noexcept { return lambda2_.size(); }
    double step1() const noexcept { return lambda1_[1] - lambda1_[0]; }
    double step2() const noexcept { return lambda2_[1] - lambda2_[0]; }

    bool is_square() const noexcept { return lambda1_ == lambda2_; }

    /// Angular frequency (rad/fs) at each cell center.
    Eigen::VectorXd omega1() const;
    Eigen::VectorXd omega2() const;

    /// Midpoint quadrature weights |dω/dλ|·Δλ per cell (rad/fs).
    Eigen::VectorXd weight1() const;
    Eigen::VectorXd weight2() const;

    /// Cell areas ΔΩ in angular-frequency coordinates.
    Eigen::MatrixXd cell_areas() const;

    SpectralGrid transposed() const { return SpectralGrid(lambda2_, lambda1_); }

    friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;

private:
    std::vector<double> lambda1_;
    std::vector<double> lambda2_;
};

/// Values start, start+step, ... up to stop (inclusive within step/1000).
std::vector<double> uniform_axis(double start, double stop, double step);

/// True when values are strictly increasing with a constant step.
bool is_uniform_axis(const std::vector<double>& values);

}  // namespace spdc
