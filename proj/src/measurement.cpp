#include "spdc/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"
#include "spdc/units.hpp"

namespace spdc {

std::vector<double> ScanAxis::values() const { return uniform_axis(start, stop, step); }

void ScanConfig::validate() const {
    for (const ScanAxis* a : {&axis1, &axis2}) {
        if (!(a->step > 0.0)) throw InvalidArgument("ScanConfig: step must be positive");
        if (!(a->stop >= a->start) || !(a->start > 0.0))
            throw InvalidArgument("ScanConfig: need 0 < start <= stop");
    }
    if (!(resolution_fwhm >= 0.0)) throw InvalidArgument("ScanConfig: resolution_fwhm must be >= 0");
    if (!(integration_time > 0.0)) throw InvalidArgument("ScanConfig: integration_time must be positive");
    if (!(peak_rate >= 0.0) || !(background_rate >= 0.0))
        throw InvalidArgument("ScanConfig: rates must be non-negative");
    if (!(p_pair >= 0.0 && p_pair <= 0.5)) throw InvalidArgument("ScanConfig: p_pair must lie in [0, 0.5]");
}

JointSpectrumGrid JointSpectrumGrid::transposed() const {
    JointSpectrumGrid out{lambda2, lambda1, counts.transpose(), metadata};
    return out;
}

Eigen::MatrixXd uncorrelated_cell_probabilities(const BiphotonState& state) {
    const Eigen::MatrixXd pairs =
        0.5 * (cell_probabilities(state.term_a) + cell_probabilities(state.term_b));
    const double total = pairs.sum();
    const Eigen::VectorXd m1 = pairs.rowwise().sum() / total;
    const Eigen::VectorXd m2 = pairs.colwise().sum().transpose() / total;
    return m1 * m2.transpose();
}

Eigen::MatrixXd projected_cell_probabilities(const BiphotonState& state, const AnalyzerAngles& angles,
                                             double p_pair) {
    const double pa = projection(state.label_a, angles);
    const double pb = projection(state.label_b, angles);
    const bool delayed = state.topology == Topology::compensated && state.tau != 0.0;
    const Eigen::VectorXd w1 = state.term_a.grid.omega1();
    const Eigen::VectorXd w2 = state.term_a.grid.omega2();
    const Eigen::MatrixXd area = state.term_a.grid.cell_areas();
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> phase = std::polar(1.0, state.delta);

    Eigen::MatrixXd out(w1.size(), w2.size());
    for (Eigen::Index i = 0; i < w1.size(); ++i) {
        for (Eigen::Index j = 0; j < w2.size(); ++j) {
            std::complex<double> a = state.term_a.values(i, j);
            std::complex<double> b = state.term_b.values(i, j);
            if (delayed) {
                a *= std::exp(i_unit * w1[i] * state.tau);
                b *= std::exp(i_unit * w2[j] * state.tau);
            }
            const double cross = std::real(phase * std::conj(a) * b);
            const double density = 0.5 * (pa * pa * std::norm(a) + pb * pb * std::norm(b) +
                                          2.0 * state.coherence * pa * pb * cross);
            out(i, j) = std::max(density, 0.0) * area(i, j);
        }
    }
    if (p_pair > 0.0) {
        // Double pairs: (R2 + R4)/(2p) per generated pair, the R4 part spread
        // as uncorrelated events at the setting's effective correlation angle.
        const double cos_theta = std::clamp(4.0 * ideal_coincidence_rate(state, angles) - 1.0, -1.0, 1.0);
        out += p_pair * (2.0 + cos_theta) / 4.0 * uncorrelated_cell_probabilities(state);
    }
    return out;
}

Eigen::MatrixXd resolution_weights(const std::vector<double>& scan_axis,
                                   const std::vector<double>& source_axis, double resolution_fwhm) {
    const auto n_scan = static_cast<Eigen::Index>(scan_axis.size());
    const auto n_src = static_cast<Eigen::Index>(source_axis.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_scan, n_src);
    if (scan_axis.empty()) return w;
    const double step = scan_axis.size() > 1 ? scan_axis[1] - scan_axis[0] : 1.0;
    const double lo = scan_axis.front() - 0.5 * step;
    const double hi = scan_axis.back() + 0.5 * step;
    const double sigma = resolution_fwhm / units::fwhm_per_sigma;

    for (Eigen::Index k = 0; k < n_src; ++k) {
        const double lambda = source_axis[static_cast<std::size_t>(k)];
        if (lambda < lo || lambda >= hi) continue;
        if (sigma == 0.0) {
            auto j = static_cast<Eigen::Index>(std::floor((lambda - lo) / step));
            j = std::clamp<Eigen::Index>(j, 0, n_scan - 1);
            w(j, k) = 1.0;
            continue;
        }
        double total = 0.0;
        for (Eigen::Index j = 0; j < n_scan; ++j) {
            const double c = scan_axis[static_cast<std::size_t>(j)];
            const double upper = (c + 0.5 * step - lambda) / (sigma * std::numbers::sqrt2);
            const double lower = (c - 0.5 * step - lambda) / (sigma * std::numbers::sqrt2);
            w(j, k) = 0.5 * (std::erf(upper) - std::erf(lower));
            total += w(j, k);
        }
        if (total > 0.0) w.col(k) /= total;
    }
    return w;
}

Eigen::MatrixXd poisson_counts(const Eigen::MatrixXd& expected, std::uint64_t seed) {
    Eigen::MatrixXd out(expected.rows(), expected.cols());
    const auto lo = static_cast<std::uint32_t>(seed);
    const auto hi = static_cast<std::uint32_t>(seed >> 32);
    for (Eigen::Index i = 0; i < expected.rows(); ++i) {
        for (Eigen::Index j = 0; j < expected.cols(); ++j) {
            const double mean = expected(i, j);
            if (!(mean > 0.0)) {
                out(i, j) = 0.0;
                continue;
            }
            const auto cell = static_cast<std::uint64_t>(i * expected.cols() + j);
            std::seed_seq seq{lo, hi, static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(cell >> 32)};
            std::mt19937_64 engine(seq);
            std::poisson_distribution<long long> draw(mean);
            out(i, j) = static_cast<double>(draw(engine));
        }
    }
    return out;
}

namespace {

void check_resolvable(const BiphotonState& state, const std::vector<double>& axis1,
                      const std::vector<double>& axis2) {
    const auto& grid = state.term_a.grid;
    const double tol = 1e-9;
    if ((axis1.size() > 1 && grid.step1() > axis1[1] - axis1[0] + tol) ||
        (axis2.size() > 1 && grid.step2() > axis2[1] - axis2[0] + tol))
        throw InvalidArgument("simulate_joint_scan: scan step is finer than the state grid");
}

JointSpectrumGrid finish_scan(const BiphotonState& state, const Eigen::MatrixXd& probabilities,
                              const ScanConfig& cfg, double rate_scale) {
    JointSpectrumGrid grid;
    grid.lambda1 = cfg.axis1.values();
    grid.lambda2 = cfg.axis2.values();
    check_resolvable(state, grid.lambda1, grid.lambda2);
    const Eigen::MatrixXd w1 = resolution_weights(grid.lambda1, state.term_a.grid.lambda1(), cfg.resolution_fwhm);
    const Eigen::MatrixXd w2 = resolution_weights(grid.lambda2, state.term_a.grid.lambda2(), cfg.resolution_fwhm);
    Eigen::MatrixXd expected = (w1 * probabilities * w2.transpose()) * (rate_scale * cfg.integration_time);
    expected.array() += cfg.background_rate * cfg.integration_time;
    grid.counts = cfg.noiseless ? expected : poisson_counts(expected, cfg.seed);

    auto& md = grid.metadata;
    md["topology"] = state.topology == Topology::compensated ? "compensated" : "uncompensated";
    md["delta_rad"] = format_double(state.delta);
    md["tau_fs"] = format_double(state.tau);
    md["coherence"] = format_double(state.coherence);
    md["resolution_fwhm_nm"] = format_double(cfg.resolution_fwhm);
    md["integration_time_s"] = format_double(cfg.integration_time);
    md["peak_rate_hz"] = format_double(cfg.peak_rate);
    md["background_rate_hz"] = format_double(cfg.background_rate);
    md["p_pair"] = format_double(cfg.p_pair);
    md["seed"] = std::to_string(cfg.seed);
    md["mode"] = cfg.noiseless ? "expected" : "poisson";
    return grid;
}

}  // namespace

JointSpectrumGrid simulate_joint_scan(const BiphotonState& state, const AnalyzerAngles& angles,
                                      const ScanConfig& cfg) {
    cfg.validate();
    auto grid = finish_scan(state, projected_cell_probabilities(state, angles, cfg.p_pair), cfg, cfg.peak_rate);
    grid.metadata["alpha1_deg"] = format_double(angles.alpha1);
    grid.metadata["alpha2_deg"] = format_double(angles.alpha2);
    return grid;
}

JointSpectrumGrid simulate_accidental_scan(const BiphotonState& state, const ScanConfig& cfg) {
    cfg.validate();
    auto grid = finish_scan(state, uncorrelated_cell_probabilities(state), cfg, cfg.peak_rate * 0.5 * cfg.p_pair);
    grid.metadata["basis"] = "consecutive-pulse";
    return grid;
}

namespace {

void require_matching_axes(const JointSpectrumGrid& a, const JointSpectrumGrid& b, const char* op) {
    if (a.lambda1 != b.lambda1 || a.lambda2 != b.lambda2)
        throw InvalidArgument(std::string(op) + ": grid axes do not match");
}

}  // namespace

GridVisibility visibility_from_grids(const JointSpectrumGrid& pm, const JointSpectrumGrid& pp) {
    require_matching_axes(pm, pp, "visibility_from_grids");
    const double a = pm.total(), b = pp.total();
    if (!(a + b > 0.0)) throw NumericalError("visibility_from_grids: both grids are empty");
    const double s = a + b;
    return GridVisibility{(a - b) / s, 2.0 * std::sqrt(a * b / (s * s * s))};
}

GridMarginals grid_marginals(const JointSpectrumGrid& grid) {
    if (!(grid.total() > 0.0)) throw NumericalError("grid_marginals: grid has no counts");
    GridMarginals out;
    out.m1.abscissa = grid.lambda1;
    out.m2.abscissa = grid.lambda2;
    // Plain loops so that transposing a grid swaps the marginals bit for bit.
    const auto& c = grid.counts;
    out.m1.weights.assign(static_cast<std::size_t>(c.rows()), 0.0);
    out.m2.weights.assign(static_cast<std::size_t>(c.cols()), 0.0);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j) out.m1.weights[static_cast<std::size_t>(i)] += c(i, j);
    for (Eigen::Index j = 0; j < c.cols(); ++j)
        for (Eigen::Index i = 0; i < c.rows(); ++i) out.m2.weights[static_cast<std::size_t>(j)] += c(i, j);
    out.fit1 = fwhm_of(out.m1);
    out.fit2 = fwhm_of(out.m2);
    return out;
}

double event_fraction(const JointSpectrumGrid& a, const JointSpectrumGrid& b) {
    require_matching_axes(a, b, "event_fraction");
    const double total = a.total() + b.total();
    if (!(total > 0.0)) throw NumericalError("event_fraction: both grids are empty");
    return a.total() / total;
}

double grid_distance(const JointSpectrumGrid& a, const JointSpectrumGrid& b) {
    require_matching_axes(a, b, "grid_distance");
    const double ta = a.total(), tb = b.total();
    if (!(ta > 0.0) || !(tb > 0.0)) throw NumericalError("grid_distance: a grid has zero total");
    return 0.5 * (a.counts / ta - b.counts / tb).cwiseAbs().sum();
}

Distribution1D singles_spectrum(const JointAmplitude& f, Axis axis, double resolution_fwhm,
                                const UnpairedComponent& unpaired) {
    Distribution1D paired = marginal_distribution(cell_probabilities(f), axis, f.grid);
    const Eigen::MatrixXd w = resolution_weights(paired.abscissa, paired.abscissa, resolution_fwhm);
    const Eigen::Map<const Eigen::VectorXd> src(paired.weights.data(),
                                                static_cast<Eigen::Index>(paired.weights.size()));
    const Eigen::VectorXd blurred = w * src;
    Distribution1D out{paired.abscissa, std::vector<double>(blurred.data(), blurred.data() + blurred.size())};

    if (unpaired.fwhm > 0.0 && unpaired.weight > 0.0) {
        const double sigma = unpaired.fwhm / units::fwhm_per_sigma;
        std::vector<double> extra(out.abscissa.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < extra.size(); ++i) {
            const double z = (out.abscissa[i] - unpaired.center) / sigma;
            extra[i] = std::exp(-0.5 * z * z);
            sum += extra[i];
        }
        const double scale = unpaired.weight * out.total() / sum;
        for (std::size_t i = 0; i < extra.size(); ++i) out.weights[i] += scale * extra[i];
    }
    return out;
}

}  // namespace spdc
