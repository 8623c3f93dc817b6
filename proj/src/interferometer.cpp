#include "spdc/interferometer.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

BiphotonState make_uncompensated(const JointAmplitude& f, double delta) {
    if (!f.normalized) throw InvalidArgument("make_uncompensated: amplitude is not normalized");
    BiphotonState s{f, swap_arms(f), {Polarization::H, Polarization::V},
                    {Polarization::V, Polarization::H}, delta, 0.0, Topology::uncompensated, 1.0};
    return s;
}

BiphotonState make_compensated(const JointAmplitude& f, double delta, double tau_fs) {
    if (!f.normalized) throw InvalidArgument("make_compensated: amplitude is not normalized");
    return BiphotonState{f, f, {Polarization::V, Polarization::V}, {Polarization::H, Polarization::H},
                         delta, tau_fs, Topology::compensated, 1.0};
}

BiphotonState with_coherence(BiphotonState state, double coherence) {
    if (!(coherence >= 0.0 && coherence <= 1.0))
        throw InvalidArgument("with_coherence: coherence must lie in [0, 1]");
    state.coherence = coherence;
    return state;
}

PathOverlap path_overlap(const BiphotonState& state, const std::optional<ArmFilters>& filters) {
    const double tau = state.topology == Topology::compensated ? state.tau : 0.0;
    PathOverlap out;
    if (filters) {
        const JointAmplitude a = attenuate(state.term_a, filters->arm1, filters->arm2);
        const JointAmplitude b = attenuate(state.term_b, filters->arm1, filters->arm2);
        out.norm_a = a.norm_squared();
        out.norm_b = b.norm_squared();
        if (!(out.norm_a + out.norm_b > 0.0))
            throw NumericalError("coincidence_rate: filters remove all of the amplitude");
        out.cross = raw_overlap(b, a, tau);
    } else {
        out.norm_a = state.term_a.norm_squared();
        out.norm_b = state.term_b.norm_squared();
        out.cross = raw_overlap(state.term_b, state.term_a, tau);
    }
    return out;
}

namespace {

// cos and sin of an angle in degrees, exact at multiples of 90°.
std::pair<double, double> analyzer_axis(double alpha_deg) {
    const double quarter = alpha_deg / 90.0;
    if (quarter == std::round(quarter)) {
        switch (((static_cast<long long>(std::round(quarter)) % 4) + 4) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double a = units::deg_to_rad(alpha_deg);
    return {std::cos(a), std::sin(a)};
}

}  // namespace

double projection(const PathLabel& label, const AnalyzerAngles& angles) {
    const auto [c1, s1] = analyzer_axis(angles.alpha1);
    const auto [c2, s2] = analyzer_axis(angles.alpha2);
    const double p1 = label.arm1 == Polarization::V ? c1 : s1;
    const double p2 = label.arm2 == Polarization::V ? c2 : s2;
    return p1 * p2;
}

double coincidence_rate(const BiphotonState& state, const PathOverlap& overlap,
                        const AnalyzerAngles& angles) {
    const double pa = projection(state.label_a, angles);
    const double pb = projection(state.label_b, angles);
    const std::complex<double> phase = std::polar(1.0, state.delta);
    const double rate = 0.5 * (pa * pa * overlap.norm_a + pb * pb * overlap.norm_b +
                               2.0 * state.coherence * pa * pb * std::real(phase * overlap.cross));
    return std::max(rate, 0.0);
}

double coincidence_rate(const BiphotonState& state, const AnalyzerAngles& angles,
                        const std::optional<ArmFilters>& filters) {
    return coincidence_rate(state, path_overlap(state, filters), angles);
}

double ideal_coincidence_rate(const BiphotonState& state, const AnalyzerAngles& angles) {
    const double pa = projection(state.label_a, angles);
    const double pb = projection(state.label_b, angles);
    return std::max(0.5 * (pa * pa + pb * pb + 2.0 * pa * pb * std::cos(state.delta)), 0.0);
}

fit::SinusoidFit fit_polarization_curve(const std::vector<double>& alpha2_deg,
                                        const std::vector<double>& rates) {
    const auto f = fit::fit_sinusoid(alpha2_deg, rates);
    const double scale = std::max(std::abs(f.offset), 1e-300);
    if (f.residual_rms > 0.05 * scale)
        throw NumericalError("polarization_scan: data are not sinusoidal in 2α (relative residual " +
                             std::to_string(f.residual_rms / scale) + ")");
    return f;
}

PolarizationCurve polarization_scan(const BiphotonState& state, double alpha1_deg,
                                    const std::vector<double>& alpha2_deg,
                                    const std::optional<ArmFilters>& filters) {
    if (alpha2_deg.size() < 8) throw InvalidArgument("polarization_scan: need at least 8 angles");
    const auto [lo, hi] = std::minmax_element(alpha2_deg.begin(), alpha2_deg.end());
    if (*hi - *lo < 180.0 - 1e-9) throw InvalidArgument("polarization_scan: angles must span at least 180°");

    const PathOverlap overlap = path_overlap(state, filters);
    PolarizationCurve curve;
    curve.alpha1 = alpha1_deg;
    curve.alpha2 = alpha2_deg;
    curve.rates.reserve(alpha2_deg.size());
    for (double a2 : alpha2_deg) curve.rates.push_back(coincidence_rate(state, overlap, {alpha1_deg, a2}));
    curve.fit = fit_polarization_curve(curve.alpha2, curve.rates);
    return curve;
}

DelayCurve delay_scan(const JointAmplitude& f, double delta, const AnalyzerAngles& angles,
                      const std::vector<double>& tau_list, double coherence) {
    BiphotonState state = with_coherence(make_compensated(f, delta, 0.0), coherence);
    DelayCurve curve;
    curve.tau = tau_list;
    curve.rates.reserve(tau_list.size());
    for (double tau : tau_list) {
        state.tau = tau;
        curve.rates.push_back(coincidence_rate(state, angles));
    }
    return curve;
}

DipFit fit_dip(const DelayCurve& curve) {
    if (curve.tau.size() != curve.rates.size()) throw InvalidArgument("dip_fwhm: curve columns differ in length");
    if (curve.tau.size() < 10) throw InvalidArgument("dip_fwhm: need at least 10 points");
    const auto g = fit::fit_gaussian(curve.tau, curve.rates, fit::Polarity::automatic);
    const double scale = std::max(std::abs(g.offset), std::abs(g.amplitude));
    if (!g.converged || !(std::abs(g.amplitude) > 1e-9 * scale) || !(scale > 0.0))
        throw NumericalError("dip_fwhm: no dip or bump found in the delay curve");
    const double fwhm = g.fwhm();
    const auto across = std::count_if(curve.tau.begin(), curve.tau.end(),
                                      [&](double t) { return std::abs(t - g.center) <= fwhm; });
    if (across < 10)
        throw InvalidArgument("dip_fwhm: fewer than 10 points across the feature; refine the delay grid");
    return DipFit{fwhm, g.center, g.offset, g.amplitude};
}

double dip_fwhm(const DelayCurve& curve) { return fit_dip(curve).fwhm; }

double delay_for_visibility(const JointAmplitude& f, double visibility) {
    if (!(visibility > 0.0 && visibility < 1.0))
        throw InvalidArgument("delay_for_visibility: visibility must lie in (0, 1)");
    auto magnitude = [&](double tau) { return std::abs(overlap_integral(f, f, tau)); };
    double hi = 1.0;
    while (magnitude(hi) > visibility) {
        hi *= 2.0;
        if (hi > 1e7) throw NumericalError("delay_for_visibility: overlap does not decay");
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        (magnitude(mid) > visibility ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace spdc
