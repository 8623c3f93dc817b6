#include "spdc/multipair.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/fit.hpp"

namespace spdc::multipair {

void MultipairModel::validate() const {
    if (!(p_pair >= 0.0 && p_pair <= max_p_pair))
        throw InvalidArgument("MultipairModel: p_pair must lie in [0, 0.5]");
    if (!(v_intrinsic >= 0.0 && v_intrinsic <= 1.0))
        throw InvalidArgument("MultipairModel: v_intrinsic must lie in [0, 1]");
    if (!(rep_rate > 0.0)) throw InvalidArgument("MultipairModel: rep_rate must be positive");
}

double r2_rate(const MultipairModel& m, double theta) {
    m.validate();
    return m.p_pair * (1.0 + m.v_intrinsic * std::cos(theta)) / 2.0;
}

double r4_rate(const MultipairModel& m, double theta) {
    m.validate();
    return 4.0 * m.p_double() * (2.0 + std::cos(theta)) / 4.0;
}

DoublePairVisibility visibility_with_double_pairs(const MultipairModel& m) {
    m.validate();
    const double p = m.p_pair, v = m.v_intrinsic;
    return {(v + p) / (1.0 + 2.0 * p), v - (2.0 * v - 1.0) * p, v - p};
}

double pair_probability_for_visibility(double v_intrinsic, double raw_visibility) {
    if (!(raw_visibility > 0.5 && raw_visibility <= v_intrinsic && v_intrinsic <= 1.0))
        throw InvalidArgument("pair_probability_for_visibility: need 0.5 < raw <= v_intrinsic <= 1");
    const double p = (v_intrinsic - raw_visibility) / (2.0 * raw_visibility - 1.0);
    if (p > MultipairModel::max_p_pair)
        throw InvalidArgument("pair_probability_for_visibility: required p_pair exceeds 0.5");
    return p;
}

double p_pair_from_singles(double singles_rate, const EfficiencyParams& eff, double rep_rate) {
    if (!(singles_rate >= 0.0)) throw InvalidArgument("p_pair_from_singles: negative singles rate");
    if (!(eff.eta_combined > 0.0 && eff.eta_combined <= 1.0))
        throw InvalidArgument("p_pair_from_singles: eta_combined must lie in (0, 1]");
    if (!(rep_rate > 0.0)) throw InvalidArgument("p_pair_from_singles: rep_rate must be positive");
    const double p = singles_rate / (eff.eta_combined * rep_rate);
    if (p > 1.0)
        throw InvalidArgument("p_pair_from_singles: unphysical input gives P_pair = " + std::to_string(p));
    return p;
}

double accidental_rate(double singles1, double singles2, double rep_rate) {
    if (!(singles1 >= 0.0) || !(singles2 >= 0.0) || !(rep_rate > 0.0))
        throw InvalidArgument("accidental_rate: rates must be non-negative and rep_rate positive");
    if (singles1 > rep_rate || singles2 > rep_rate)
        throw InvalidArgument("accidental_rate: singles exceed the repetition rate");
    return singles1 * singles2 / rep_rate;
}

double corrected_visibility(const CorrectionInput& in, double background) {
    const double denominator = in.c_max + in.c_min - 2.0 * background;
    if (!(denominator > 0.0))
        throw NumericalError("correction_bounds: background exceeds the mean coincidence level");
    return (in.c_max - in.c_min) / denominator;
}

CorrectionBounds correction_bounds(const CorrectionInput& in, OverSubtraction policy) {
    if (!(in.c_max >= 0.0) || !(in.c_min >= 0.0) || !(in.c_acc >= 0.0))
        throw InvalidArgument("correction_bounds: counts must be non-negative");
    if (in.c_max < in.c_min) throw InvalidArgument("correction_bounds: c_max < c_min");
    if (in.c_max + in.c_min == 0.0) throw InvalidArgument("correction_bounds: no coincidences");

    CorrectionBounds out;
    out.over_subtracted = in.c_min < in.c_acc;
    if (out.over_subtracted && policy == OverSubtraction::reject) {
        const char* which = in.c_min < 0.5 * in.c_acc ? "lower and upper bounds" : "upper bound";
        throw InvalidArgument(std::string("correction_bounds: over-subtraction, c_min < c_acc violates the ") +
                              which);
    }
    out.v_raw = corrected_visibility(in, 0.0);
    out.v_low = corrected_visibility(in, 0.5 * in.c_acc);
    out.v_high = corrected_visibility(in, in.c_acc);
    return out;
}

PowerFit fit_visibility_vs_power(const std::vector<PowerPoint>& points) {
    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const auto& p : points) {
        x.push_back(p.power_mw);
        y.push_back(p.visibility);
    }
    std::vector<double> distinct = x;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3)
        throw InvalidArgument("fit_visibility_vs_power: need at least 3 distinct powers");
    const auto line = fit::fit_line(x, y);
    return PowerFit{-100.0 * line.slope, line.intercept, line.residual_rms};
}

BandSolution solve_from_corrected_band(double raw, double v_low) {
    if (!(raw > 0.5 && v_low >= raw && v_low < 2.0))
        throw InvalidArgument("solve_from_corrected_band: need 0.5 < raw <= v_low");
    // v_low = raw/(1 − a) with a = c_acc/(c_max + c_min) = p/(1 + 2p).
    const double a = 1.0 - raw / v_low;
    if (!(a < 0.5)) throw InvalidArgument("solve_from_corrected_band: band implies p_pair out of range");
    const double p = a / (1.0 - 2.0 * a);
    const double v = raw * (1.0 + 2.0 * p) - p;
    if (!(v >= 0.0 && v <= 1.0 && p <= MultipairModel::max_p_pair))
        throw InvalidArgument("solve_from_corrected_band: no physical solution");
    return BandSolution{p, v, a};
}

}  // namespace spdc::multipair
