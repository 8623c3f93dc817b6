#pragma once

#include <vector>

namespace spdc::multipair {

/// Single-pair emission probability per pulse with Poissonian double pairs
/// (p_double = p_pair²/2, always derived).
struct MultipairModel {
    double p_pair = 0.0;
    double v_intrinsic = 1.0;
    double rep_rate = 76e6;  // Hz

    static constexpr double max_p_pair = 0.5;

    void validate() const;
    double p_double() const { return 0.5 * p_pair * p_pair; }
};

struct EfficiencyParams {
    double eta_combined = 0.113;  // coupling × detector quantum efficiency
};

/// Coincidence totals for the maximum and minimum analyzer settings and the
/// consecutive-pulse coincidences from the same integration.
struct CorrectionInput {
    double c_max = 0.0;
    double c_min = 0.0;
    double c_acc = 0.0;
};

/// Same-pulse pair contribution p·(1 + v·cos θ)/2.
double r2_rate(const MultipairModel& m, double theta);

/// Incoherent double-pair contribution 4·p_double·(2 + cos θ)/4.
double r4_rate(const MultipairModel& m, double theta);

struct DoublePairVisibility {
    double exact = 0.0;        // (v + p)/(1 + 2p)
    double linear = 0.0;       // v − (2v − 1)·p
    double first_order = 0.0;  // v − p
};

DoublePairVisibility visibility_with_double_pairs(const MultipairModel& m);

/// Inverse of the exact formula: p such that (v + p)/(1 + 2p) = raw.
double pair_probability_for_visibility(double v_intrinsic, double raw_visibility);

/// P_pair = S/(η·f).
double p_pair_from_singles(double singles_rate, const EfficiencyParams& eff, double rep_rate);

/// Consecutive-pulse coincidence rate S1·S2/f.
double accidental_rate(double singles1, double singles2, double rep_rate);

enum class OverSubtraction {
    /// Throw when subtracting the full consecutive-pulse rate drives c_min negative.
    reject,
    /// Report bounds anyway; values above 1 are possible.
    allow,
};

struct CorrectionBounds {
    double v_raw = 0.0;
    double v_low = 0.0;   // background c_acc/2
    double v_high = 0.0;  // background c_acc
    bool over_subtracted = false;
};

/// v(B) = (c_max − c_min)/(c_max + c_min − 2B) for B ∈ [c_acc/2, c_acc].
CorrectionBounds correction_bounds(const CorrectionInput& input,
                                   OverSubtraction policy = OverSubtraction::reject);

/// Visibility after subtracting background B from both settings.
double corrected_visibility(const CorrectionInput& input, double background);

struct PowerPoint {
    double power_mw = 0.0;
    double visibility = 0.0;
};

struct PowerFit {
    double slope_pct_per_mw = 0.0;  // magnitude of the (negative) slope, in %/mW
    double v_max_at_zero = 0.0;     // intercept, fraction
    double residual_rms = 0.0;
};

PowerFit fit_visibility_vs_power(const std::vector<PowerPoint>& points);

/// Model parameters that reproduce a raw visibility together with the lower
/// corrected bound, assuming consecutive-pulse coincidences of p² per pulse.
struct BandSolution {
    double p_pair = 0.0;
    double v_intrinsic = 0.0;
    double accidental_fraction = 0.0;  // c_acc / (c_max + c_min)
};

BandSolution solve_from_corrected_band(double raw_visibility, double v_low);

}  // namespace spdc::multipair
