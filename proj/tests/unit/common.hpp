#pragma once

#include <cmath>
#include <random>

#include "spdc/jsa.hpp"
#include "spdc/units.hpp"

namespace testing {

inline spdc::SpectralGrid default_grid() { return spdc::SpectralGrid::uniform(740.0, 822.0, 0.25); }

/// Calibrated to 9.2/5.8 nm marginals; computed once per process.
inline const spdc::CalibrationResult& calibrated() {
    static const spdc::CalibrationResult result = spdc::calibrate_to_marginals({}, default_grid());
    return result;
}

inline const spdc::JointAmplitude& calibrated_jsa() {
    static const spdc::JointAmplitude f = spdc::build_jsa(calibrated().params, default_grid());
    return f;
}

inline spdc::JsaParams params(double width_e, double width_o, double pump_width = 1.6) {
    spdc::JsaParams p;
    p.width_e = width_e;
    p.width_o = width_o;
    p.pump_width = pump_width;
    p.pump_center = spdc::JsaParams::energy_conserving_pump(p.center_e, p.center_o);
    return p;
}

/// Analytic marginal variances (rad²/fs²) of the double-gaussian intensity.
struct GaussVariances {
    double var1, var2, var_diff;
};

inline GaussVariances gaussian_variances(const spdc::JsaParams& p) {
    using namespace spdc::units;
    const double se = sigma_omega(p.width_e, p.center_e), so = sigma_omega(p.width_o, p.center_o);
    const double sp = sigma_omega(p.pump_width, p.pump_center);
    const double se2 = se * se, so2 = so * so, sp2 = sp * sp, s = se2 + so2 + sp2;
    return {se2 * (so2 + sp2) / s, so2 * (se2 + sp2) / s, (4 * se2 * so2 + sp2 * (se2 + so2)) / s};
}

}  // namespace testing
