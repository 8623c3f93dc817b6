#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "spdc/fit.hpp"
#include "spdc/spectral_grid.hpp"

namespace spdc {

enum class JsaModel { double_gaussian, gaussian_pump_sinc };

/// Parameters of the biphoton spectral amplitude. Widths are intensity FWHM in
/// nm. The `_e` factor acts on axis 1 and the `_o` factor on axis 2.
struct JsaParams {
    double center_e = 781.55;
    double center_o = 780.19;
    double width_e = 10.0;
    double width_o = 6.0;
    double pump_center = 390.0;
    double pump_width = 1.6;
    JsaModel model = JsaModel::double_gaussian;
    double sinc_group_delay = 300.0;  // fs, sinc model only

    void validate() const;

    /// Pump wavelength that conserves energy for the two centers.
    static double energy_conserving_pump(double center1, double center2);
};

/// Complex amplitude sampled at the cell centers of a SpectralGrid.
/// When `normalized`, Σ|f|²·ΔΩ = 1 (ΔΩ in rad²/fs²).
struct JointAmplitude {
    SpectralGrid grid;
    Eigen::MatrixXcd values;
    bool normalized = false;

    /// Σ|f|²·ΔΩ.
    double norm_squared() const;
};

inline constexpr double norm_tolerance = 1e-9;

JointAmplitude build_jsa(const JsaParams& params, const SpectralGrid& grid);

/// g(ω1, ω2) = f(ω2, ω1).
JointAmplitude swap_arms(const JointAmplitude& f);

/// Σ f·conj(g)·exp[i(ω2−ω1)τ]·ΔΩ over the grid (midpoint rule). Inputs must
/// be normalized and share a grid.
std::complex<double> overlap_integral(const JointAmplitude& f, const JointAmplitude& g,
                                      double tau_fs);

/// Same kernel without the normalization precondition (used for filtered,
/// survival-weighted amplitudes).
std::complex<double> raw_overlap(const JointAmplitude& f, const JointAmplitude& g, double tau_fs);

/// |f|² per cell (spectral density in angular-frequency coordinates).
Eigen::MatrixXd joint_intensity(const JointAmplitude& f);

/// |f|²·ΔΩ per cell: probability of a pair landing in each cell.
Eigen::MatrixXd cell_probabilities(const JointAmplitude& f);

struct Distribution1D {
    std::vector<double> abscissa;  // nm
    std::vector<double> weights;

    double total() const;
};

enum class Axis { one = 1, two = 2 };

/// Sums `matrix` over the other axis.
Distribution1D marginal_distribution(const Eigen::MatrixXd& matrix, Axis axis,
                                     const SpectralGrid& grid);

struct PeakWidth {
    double fwhm = 0.0;
    double center = 0.0;
    double fwhm_error = 0.0;
    double center_error = 0.0;
    /// True when the Gaussian fit failed and the half-maximum crossings were used.
    bool fallback = false;
};

/// Gaussian-fit FWHM with half-maximum-crossing fallback.
PeakWidth fwhm_of(const Distribution1D& d);

struct MarginalTargets {
    double m1_fwhm = 9.2;
    double m2_fwhm = 5.8;
    double center1 = 781.55;
    double center2 = 780.19;
    double pump_width = 1.6;
};

struct CalibrationOptions {
    int max_iterations = 60;
    double tolerance = 0.005;  // relative marginal-FWHM mismatch
    /// Widen the pump when the requested pump width cannot produce the
    /// targets with a double-gaussian amplitude.
    bool allow_pump_adjustment = true;
    /// Upper limit on either factor width, as a multiple of the wider target.
    double max_width_factor = 4.0;
};

struct CalibrationResult {
    JsaParams params;
    double residual = 0.0;  // max relative marginal-FWHM mismatch
    double m1_fwhm = 0.0;
    double m2_fwhm = 0.0;
    bool pump_adjusted = false;
    int iterations = 0;
};

/// Marginal FWHMs (nm) of the pair probability per cell, Gaussian-fit.
std::pair<double, double> marginal_fwhms(const JointAmplitude& f);

/// Fits width_e/width_o of a double-gaussian amplitude so its marginal FWHMs
/// on `grid` match the targets. Throws NumericalError with the residual when
/// no solution within tolerance is found.
CalibrationResult calibrate_to_marginals(const MarginalTargets& targets, const SpectralGrid& grid,
                                         const CalibrationOptions& options = {});

struct SpectralFilter {
    enum class Shape { identity, gaussian, rectangular };
    Shape shape = Shape::identity;
    double center = 0.0;  // nm
    double fwhm = 0.0;    // nm

    static SpectralFilter identity() { return {}; }
    static SpectralFilter gaussian(double center, double fwhm) { return {Shape::gaussian, center, fwhm}; }
    static SpectralFilter rectangular(double center, double fwhm) {
        return {Shape::rectangular, center, fwhm};
    }

    void validate() const;
    double transmission(double lambda_nm) const;
};

struct FilterResult {
    JointAmplitude amplitude;  // renormalized
    double survival = 1.0;     // Σ|filtered|² / Σ|f|²
};

/// Amplitude times sqrt(transmission) per arm; renormalized.
FilterResult apply_filter(const JointAmplitude& f, const SpectralFilter& arm1,
                          const SpectralFilter& arm2);

/// f·sqrt(T1·T2) without renormalization.
JointAmplitude attenuate(const JointAmplitude& f, const SpectralFilter& arm1,
                         const SpectralFilter& arm2);

/// RMS of ω2 − ω1 under |f|² (rad/fs); sets the two-photon coherence time.
double difference_frequency_rms(const JointAmplitude& f);

}  // namespace spdc
