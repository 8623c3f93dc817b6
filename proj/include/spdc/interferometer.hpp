#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "spdc/fit.hpp"
#include "spdc/jsa.hpp"

namespace spdc {

enum class Polarization { H, V };

/// Polarizations of the photons in arm 1 and arm 2 for one decay path.
struct PathLabel {
    Polarization arm1;
    Polarization arm2;
    friend bool operator==(const PathLabel&, const PathLabel&) = default;
};

enum class Topology { uncompensated, compensated };

/// Two-path biphoton state (1/√2)[a·|label_a⟩ + e^{iδ}·b·|label_b⟩].
/// In the compensated topology the arm delay τ adds e^{iω1τ} to path a and
/// e^{iω2τ} to path b. `coherence` ∈ [0, 1] scales the interference between
/// the paths (1 = pure state).
struct BiphotonState {
    JointAmplitude term_a;
    JointAmplitude term_b;
    PathLabel label_a;
    PathLabel label_b;
    double delta = 0.0;  // rad
    double tau = 0.0;    // fs
    Topology topology = Topology::compensated;
    double coherence = 1.0;
};

/// Analyzer transmission axes in degrees from vertical: cos α|V⟩ + sin α|H⟩.
struct AnalyzerAngles {
    double alpha1 = 0.0;
    double alpha2 = 0.0;
};

/// Optional spectral filters in front of each detector.
struct ArmFilters {
    SpectralFilter arm1;
    SpectralFilter arm2;
};

BiphotonState make_uncompensated(const JointAmplitude& f, double delta);
BiphotonState make_compensated(const JointAmplitude& f, double delta, double tau_fs);

/// Returns a copy with a reduced path coherence.
BiphotonState with_coherence(BiphotonState state, double coherence);

/// Norms and cross term of the two (possibly filtered) paths; enough to
/// evaluate the coincidence rate at any analyzer setting.
struct PathOverlap {
    double norm_a = 1.0;
    double norm_b = 1.0;
    /// Σ conj(a·phase_a)·(b·phase_b)·ΔΩ.
    std::complex<double> cross{1.0, 0.0};
};

PathOverlap path_overlap(const BiphotonState& state, const std::optional<ArmFilters>& filters = {});

/// Projection amplitude of a path label onto the analyzer setting.
double projection(const PathLabel& label, const AnalyzerAngles& angles);

/// Probability per generated pair of a coincidence behind the analyzers.
double coincidence_rate(const BiphotonState& state, const AnalyzerAngles& angles,
                        const std::optional<ArmFilters>& filters = {});

/// Coincidence rate from precomputed path overlap.
double coincidence_rate(const BiphotonState& state, const PathOverlap& overlap,
                        const AnalyzerAngles& angles);

/// Rate the same setting would give with perfectly overlapping, unfiltered
/// paths. Defines the effective correlation angle for multi-pair modelling.
double ideal_coincidence_rate(const BiphotonState& state, const AnalyzerAngles& angles);

struct PolarizationCurve {
    double alpha1 = 0.0;
    std::vector<double> alpha2;
    std::vector<double> rates;
    fit::SinusoidFit fit;

    double visibility() const { return fit.visibility(); }
};

/// Rates while rotating analyzer 2; visibility from a fitted a + b·cos 2(α2 − φ).
PolarizationCurve polarization_scan(const BiphotonState& state, double alpha1_deg,
                                    const std::vector<double>& alpha2_deg,
                                    const std::optional<ArmFilters>& filters = {});

/// Fits a sinusoid to measured or simulated polarization data.
fit::SinusoidFit fit_polarization_curve(const std::vector<double>& alpha2_deg,
                                        const std::vector<double>& rates);

struct DelayCurve {
    std::vector<double> tau;  // fs
    std::vector<double> rates;
};

/// Compensated-topology coincidence rate at each delay, in input order.
DelayCurve delay_scan(const JointAmplitude& f, double delta, const AnalyzerAngles& angles,
                      const std::vector<double>& tau_list, double coherence = 1.0);

struct DipFit {
    double fwhm = 0.0;    // fs
    double center = 0.0;  // fs
    double baseline = 0.0;
    double depth = 0.0;  // signed: negative for a dip
};

/// Gaussian fit of the interference feature of a delay curve.
DipFit fit_dip(const DelayCurve& curve);
double dip_fwhm(const DelayCurve& curve);

/// Compensated delay at which |O(τ)| falls to `visibility` (bisection on the
/// positive side of the interference feature).
double delay_for_visibility(const JointAmplitude& f, double visibility);

}  // namespace spdc
