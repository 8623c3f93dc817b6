#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spdc/interferometer.hpp"
#include "spdc/jsa.hpp"

namespace spdc {

struct ScanAxis {
    double start = 760.0;  // nm
    double stop = 800.0;
    double step = 0.5;

    std::vector<double> values() const;
};

/// Monochromator scan settings.
struct ScanConfig {
    ScanAxis axis1;
    ScanAxis axis2;
    double resolution_fwhm = 0.3;   // nm
    double integration_time = 30.0; // s
    double peak_rate = 1e5;         // counts/s per unit pair probability
    double background_rate = 0.0;   // counts/s per cell
    std::uint64_t seed = 1;
    /// Emit expected counts instead of a Poisson draw.
    bool noiseless = false;
    /// Pair probability per pulse; adds the double-pair contribution.
    double p_pair = 0.0;

    void validate() const;
};

/// Coincidence counts per (λ1, λ2) cell plus free-form metadata. Counts are
/// integers for Poisson scans and expected values for noiseless scans.
struct JointSpectrumGrid {
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    Eigen::MatrixXd counts;  // lambda1.size() × lambda2.size()
    std::map<std::string, std::string> metadata;

    double total() const { return counts.sum(); }
    JointSpectrumGrid transposed() const;
};

/// Per-pair probability of each state-grid cell behind the analyzers,
/// including path coherence and the optional double-pair background.
Eigen::MatrixXd projected_cell_probabilities(const BiphotonState& state, const AnalyzerAngles& angles,
                                             double p_pair = 0.0);

/// Uncorrelated product of the two single-arm marginals of the pair
/// distribution; sums to 1.
Eigen::MatrixXd uncorrelated_cell_probabilities(const BiphotonState& state);

/// Fraction of state-grid mass at wavelength `source` that lands in each scan
/// bin, for a Gaussian instrument response of the given FWHM.
Eigen::MatrixXd resolution_weights(const std::vector<double>& scan_axis,
                                   const std::vector<double>& source_axis, double resolution_fwhm);

JointSpectrumGrid simulate_joint_scan(const BiphotonState& state, const AnalyzerAngles& angles,
                                      const ScanConfig& cfg);

/// Consecutive-pulse (accidental) joint spectrum: uncorrelated pairs at
/// p_pair/2 per generated pair.
JointSpectrumGrid simulate_accidental_scan(const BiphotonState& state, const ScanConfig& cfg);

/// Draws Poisson counts for an expected grid with per-cell seeded streams.
Eigen::MatrixXd poisson_counts(const Eigen::MatrixXd& expected, std::uint64_t seed);

struct GridVisibility {
    double visibility = 0.0;
    double std_error = 0.0;
};

/// (Σc⁺⁻ − Σc⁺⁺)/(Σc⁺⁻ + Σc⁺⁺) with Poisson error propagation.
GridVisibility visibility_from_grids(const JointSpectrumGrid& grid_pm, const JointSpectrumGrid& grid_pp);

struct GridMarginals {
    Distribution1D m1;
    Distribution1D m2;
    PeakWidth fit1;
    PeakWidth fit2;
};

GridMarginals grid_marginals(const JointSpectrumGrid& grid);

/// Σa / (Σa + Σb).
double event_fraction(const JointSpectrumGrid& a, const JointSpectrumGrid& b);

/// Total-variation distance between the two grids normalized to unit total.
double grid_distance(const JointSpectrumGrid& a, const JointSpectrumGrid& b);

/// Single-arm spectrum: the pair marginal seen through the instrument
/// response, plus an optional Gaussian component of unpaired photons.
struct UnpairedComponent {
    double center = 780.0;
    double fwhm = 0.0;   // nm; 0 disables the component
    double weight = 0.0; // relative to the paired marginal
};

Distribution1D singles_spectrum(const JointAmplitude& f, Axis axis, double resolution_fwhm,
                                const UnpairedComponent& unpaired = {});

}  // namespace spdc
