#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

namespace spdc::fit {

struct LmOptions {
    int max_iterations = 200;
    double cost_tolerance = 1e-15;  // relative decrease
    double step_tolerance = 1e-12;  // relative parameter change
};

struct LmResult {
    Eigen::VectorXd parameters;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;
    double cost = 0.0;  // 0.5 * |r|^2
    int iterations = 0;
    bool converged = false;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Levenberg-Marquardt with a central-difference Jacobian. `scale` sets the
/// typical magnitude of each parameter and the finite-difference step.
LmResult levenberg_marquardt(const ResidualFunction& residuals, Eigen::VectorXd start,
                             const Eigen::VectorXd& scale, const LmOptions& options = {});

/// Standard errors sqrt(diag(s² (JᵀJ)⁻¹)) with s² = |r|²/(m - n).
Eigen::VectorXd parameter_errors(const LmResult& result);

enum class Polarity { peak, dip, automatic };

/// y = offset + amplitude * exp(-(x - center)² / (2 sigma²)); amplitude < 0 for dips.
struct GaussianFit {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    double amplitude_error = 0.0;
    double center_error = 0.0;
    double sigma_error = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;

    double fwhm() const;
    double fwhm_error() const;
};

/// Four-parameter Gaussian least-squares fit. Does not throw on
/// non-convergence; callers inspect `converged`.
GaussianFit fit_gaussian(std::span<const double> x, std::span<const double> y,
                         Polarity polarity = Polarity::peak);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
};

/// Ordinary least squares. Throws InvalidArgument for fewer than two
/// distinct abscissae.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// rate(α) = offset + amplitude·cos 2(α − phase), α in degrees, amplitude ≥ 0.
struct SinusoidFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase_deg = 0.0;  // in [0, 180)
    double residual_rms = 0.0;

    double visibility() const { return offset > 0.0 ? amplitude / offset : 0.0; }
    double maximum() const { return offset + amplitude; }
    double minimum() const { return offset - amplitude; }
};

SinusoidFit fit_sinusoid(std::span<const double> angles_deg, std::span<const double> values);

}  // namespace spdc::fit
