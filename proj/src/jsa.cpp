#include "spdc/jsa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc {

void JsaParams::validate() const {
    if (!(width_e > 0.0) || !(width_o > 0.0) || !(pump_width > 0.0))
        throw InvalidArgument("JsaParams: widths must be positive");
    if (!(center_e > 0.0) || !(center_o > 0.0) || !(pump_center > 0.0))
        throw InvalidArgument("JsaParams: center wavelengths must be positive");
    if (model == JsaModel::gaussian_pump_sinc && !(sinc_group_delay > 0.0))
        throw InvalidArgument("JsaParams: sinc_group_delay must be positive for the sinc model");
    const double mismatch = std::abs(1.0 / pump_center - 1.0 / center_e - 1.0 / center_o);
    if (mismatch * pump_center > 0.05)
        throw InvalidArgument("JsaParams: centers are far from energy conservation with the pump");
}

double JsaParams::energy_conserving_pump(double center1, double center2) {
    return 1.0 / (1.0 / center1 + 1.0 / center2);
}

double JointAmplitude::norm_squared() const {
    return (values.cwiseAbs2().array() * grid.cell_areas().array()).sum();
}

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// ∫∫|f|² dω1 dω2 over the whole plane for the unnormalized model amplitude.
double analytic_total(const JsaParams& p) {
    const double se = units::sigma_omega(p.width_e, p.center_e);
    const double so = units::sigma_omega(p.width_o, p.center_o);
    const double sp = units::sigma_omega(p.pump_width, p.pump_center);
    const double wp = units::omega_from_wavelength(p.pump_center);
    if (p.model == JsaModel::gaussian_pump_sinc) {
        return 0.5 * std::sqrt(2.0 * std::numbers::pi) * sp * 2.0 * std::numbers::pi /
               p.sinc_group_delay;
    }
    const double we = units::omega_from_wavelength(p.center_e);
    const double wo = units::omega_from_wavelength(p.center_o);
    const double a = 1.0 / (sp * sp), ie = 1.0 / (se * se), io = 1.0 / (so * so);
    Eigen::Matrix2d prec;
    prec << a + ie, a, a, a + io;
    Eigen::Vector2d b(a * wp + ie * we, a * wp + io * wo);
    const double constant = a * wp * wp + ie * we * we + io * wo * wo;
    const double q_min = constant - b.dot(prec.ldlt().solve(b));
    return 2.0 * std::numbers::pi / std::sqrt(prec.determinant()) * std::exp(-0.5 * q_min);
}

void require_same_grid(const JointAmplitude& f, const JointAmplitude& g, const char* op) {
    if (!(f.grid == g.grid)) throw InvalidArgument(std::string(op) + ": amplitudes are on different grids");
}

void require_normalized(const JointAmplitude& f, const char* op) {
    if (!f.normalized || std::abs(f.norm_squared() - 1.0) > norm_tolerance)
        throw InvalidArgument(std::string(op) + ": amplitude is not normalized");
}

}  // namespace

JointAmplitude build_jsa(const JsaParams& params, const SpectralGrid& grid) {
    params.validate();
    const double se = units::sigma_omega(params.width_e, params.center_e);
    const double so = units::sigma_omega(params.width_o, params.center_o);
    const double sp = units::sigma_omega(params.pump_width, params.pump_center);
    const double wp = units::omega_from_wavelength(params.pump_center);
    const double we = units::omega_from_wavelength(params.center_e);
    const double wo = units::omega_from_wavelength(params.center_o);
    const Eigen::VectorXd w1 = grid.omega1();
    const Eigen::VectorXd w2 = grid.omega2();

    Eigen::MatrixXcd values(w1.size(), w2.size());
    for (Eigen::Index i = 0; i < w1.size(); ++i) {
        for (Eigen::Index j = 0; j < w2.size(); ++j) {
            const double sum = w1[i] + w2[j] - wp;
            double v = std::exp(-sum * sum / (4.0 * sp * sp));
            if (params.model == JsaModel::double_gaussian) {
                const double de = w1[i] - we, d_o = w2[j] - wo;
                v *= std::exp(-de * de / (4.0 * se * se) - d_o * d_o / (4.0 * so * so));
            } else {
                const double diff = (w1[i] - we) - (w2[j] - wo);
                v *= sinc(0.5 * params.sinc_group_delay * diff);
            }
            values(i, j) = v;
        }
    }

    JointAmplitude f{grid, std::move(values), false};
    const double captured = f.norm_squared();
    const double loss = 1.0 - captured / analytic_total(params);
    if (!(captured > 0.0) || loss > 0.01) {
        throw InvalidArgument("build_jsa: grid too narrow, truncated norm loss " +
                              std::to_string(100.0 * loss) + "% exceeds 1%");
    }
    f.values /= std::sqrt(captured);
    f.normalized = true;
    return f;
}

JointAmplitude swap_arms(const JointAmplitude& f) {
    if (!f.grid.is_square()) throw InvalidArgument("swap_arms: grid is not square");
    return JointAmplitude{f.grid, f.values.transpose(), f.normalized};
}

std::complex<double> raw_overlap(const JointAmplitude& f, const JointAmplitude& g, double tau_fs) {
    require_same_grid(f, g, "overlap_integral");
    const Eigen::VectorXd w1 = f.grid.omega1(), w2 = f.grid.omega2();
    const Eigen::VectorXd q1 = f.grid.weight1(), q2 = f.grid.weight2();
    const std::complex<double> i_unit(0.0, 1.0);
    Eigen::VectorXcd left(w1.size()), right(w2.size());
    for (Eigen::Index i = 0; i < w1.size(); ++i) left[i] = std::exp(-i_unit * w1[i] * tau_fs) * q1[i];
    for (Eigen::Index j = 0; j < w2.size(); ++j) right[j] = std::exp(i_unit * w2[j] * tau_fs) * q2[j];
    const Eigen::MatrixXcd product = f.values.cwiseProduct(g.values.conjugate());
    return (left.transpose() * product * right)(0, 0);
}

std::complex<double> overlap_integral(const JointAmplitude& f, const JointAmplitude& g,
                                      double tau_fs) {
    require_same_grid(f, g, "overlap_integral");
    require_normalized(f, "overlap_integral");
    require_normalized(g, "overlap_integral");
    return raw_overlap(f, g, tau_fs);
}

Eigen::MatrixXd joint_intensity(const JointAmplitude& f) { return f.values.cwiseAbs2(); }

Eigen::MatrixXd cell_probabilities(const JointAmplitude& f) {
    return f.values.cwiseAbs2().cwiseProduct(f.grid.cell_areas());
}

double Distribution1D::total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

Distribution1D marginal_distribution(const Eigen::MatrixXd& matrix, Axis axis,
                                     const SpectralGrid& grid) {
    if (matrix.rows() != static_cast<Eigen::Index>(grid.size1()) ||
        matrix.cols() != static_cast<Eigen::Index>(grid.size2()))
        throw InvalidArgument("marginal_distribution: matrix shape does not match grid");
    Distribution1D d;
    if (axis == Axis::one) {
        d.abscissa = grid.lambda1();
        const Eigen::VectorXd sums = matrix.rowwise().sum();
        d.weights.assign(sums.data(), sums.data() + sums.size());
    } else {
        d.abscissa = grid.lambda2();
        const Eigen::VectorXd sums = matrix.colwise().sum().transpose();
        d.weights.assign(sums.data(), sums.data() + sums.size());
    }
    for (double& w : d.weights) w = std::max(w, 0.0);
    return d;
}

PeakWidth fwhm_of(const Distribution1D& d) {
    const auto& x = d.abscissa;
    const auto& y = d.weights;
    if (x.size() != y.size()) throw InvalidArgument("fwhm_of: abscissa and weights differ in length");
    if (x.size() < 5) throw InvalidArgument("fwhm_of: need at least 5 samples");
    for (double w : y) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("fwhm_of: weights must be finite and non-negative");
    }
    const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    if (!(*max_it > *min_it)) throw NumericalError("fwhm_of: flat distribution has no peak");
    const double step = x[1] - x[0];

    const auto g = fit::fit_gaussian(x, y, fit::Polarity::peak);
    if (g.converged && g.amplitude > 0.0 && g.fwhm() >= step && g.center >= x.front() &&
        g.center <= x.back() && g.fwhm() < 2.0 * (x.back() - x.front())) {
        return PeakWidth{g.fwhm(), g.center, g.fwhm_error(), g.center_error, false};
    }

    // Fallback: linear interpolation of the half-maximum crossings.
    const auto peak = static_cast<std::size_t>(max_it - y.begin());
    const double half = *min_it + 0.5 * (*max_it - *min_it);
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && y[lo - 1] >= half) --lo;
    while (hi + 1 < y.size() && y[hi + 1] >= half) ++hi;
    if (hi - lo + 1 < 2 || lo == 0 || hi + 1 == y.size()) {
        throw NumericalError("fwhm_of: peak is unresolved or touches the edge; no two half-maximum crossings");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        if ((i < lo || i > hi) && y[i] >= half)
            throw NumericalError("fwhm_of: multi-modal distribution; half-maximum crossings are ambiguous");
    }
    auto cross = [&](std::size_t a, std::size_t b) {
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    };
    const double left = cross(lo - 1, lo);
    const double right = cross(hi, hi + 1);
    return PeakWidth{right - left, 0.5 * (left + right), step, step, true};
}

std::pair<double, double> marginal_fwhms(const JointAmplitude& f) {
    const Eigen::MatrixXd p = cell_probabilities(f);
    return {fwhm_of(marginal_distribution(p, Axis::one, f.grid)).fwhm,
            fwhm_of(marginal_distribution(p, Axis::two, f.grid)).fwhm};
}

namespace {

// Marginal standard deviations (rad/fs) of the double-gaussian intensity.
std::pair<double, double> analytic_marginal_sigmas(double se, double so, double sp) {
    const double s = se * se + so * so + sp * sp;
    return {std::sqrt(se * se * (so * so + sp * sp) / s), std::sqrt(so * so * (se * se + sp * sp) / s)};
}

struct AnalyticSolution {
    double width_e = 0.0;
    double width_o = 0.0;
    double residual = 0.0;
};

AnalyticSolution solve_analytic(const MarginalTargets& t, double pump_center, double pump_width) {
    const double t1 = units::sigma_omega(t.m1_fwhm, t.center1);
    const double t2 = units::sigma_omega(t.m2_fwhm, t.center2);
    const double sp = units::sigma_omega(pump_width, pump_center);
    const fit::ResidualFunction res = [&](const Eigen::VectorXd& logs) {
        const auto [m1, m2] = analytic_marginal_sigmas(std::exp(logs[0]), std::exp(logs[1]), sp);
        Eigen::VectorXd r(2);
        r << m1 / t1 - 1.0, m2 / t2 - 1.0;
        return r;
    };
    Eigen::VectorXd start(2);
    start << std::log(t1 * 1.5), std::log(t2);
    const auto lm = fit::levenberg_marquardt(res, start, Eigen::VectorXd::Ones(2));
    AnalyticSolution out;
    out.width_e = units::fwhm_nm_from_sigma_omega(std::exp(lm.parameters[0]), t.center1);
    out.width_o = units::fwhm_nm_from_sigma_omega(std::exp(lm.parameters[1]), t.center2);
    out.residual = lm.residuals.cwiseAbs().maxCoeff();
    return out;
}

}  // namespace

CalibrationResult calibrate_to_marginals(const MarginalTargets& targets, const SpectralGrid& grid,
                                         const CalibrationOptions& options) {
    if (!(targets.m1_fwhm > 0.0) || !(targets.m2_fwhm > 0.0) || !(targets.center1 > 0.0) ||
        !(targets.center2 > 0.0))
        throw InvalidArgument("calibrate_to_marginals: targets must be positive");
    if (!(targets.pump_width > 0.0)) throw InvalidArgument("calibrate_to_marginals: pump_width must be positive");

    const double pump_center = JsaParams::energy_conserving_pump(targets.center1, targets.center2);
    const double width_cap = options.max_width_factor * std::max(targets.m1_fwhm, targets.m2_fwhm);

    JsaParams params;
    params.center_e = targets.center1;
    params.center_o = targets.center2;
    params.pump_center = pump_center;
    params.model = JsaModel::double_gaussian;

    auto measure = [&](double we, double wo) -> std::pair<double, double> {
        JsaParams p = params;
        p.width_e = we;
        p.width_o = wo;
        return marginal_fwhms(build_jsa(p, grid));
    };

    double pump = targets.pump_width;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < 200; ++attempt, pump *= 1.01) {
        const AnalyticSolution guess = solve_analytic(targets, pump_center, pump);
        const bool feasible = guess.residual < 1e-6 && guess.width_e <= width_cap &&
                              guess.width_o <= width_cap;
        if (!feasible && options.allow_pump_adjustment) continue;
        params.pump_width = pump;

        // Refine on the actual grid: the Gaussian fit of the sampled marginal in
        // wavelength differs slightly from the linearised analytic width.
        const fit::ResidualFunction res = [&](const Eigen::VectorXd& logs) {
            Eigen::VectorXd r(2);
            try {
                const auto [m1, m2] = measure(std::exp(logs[0]), std::exp(logs[1]));
                r << m1 / targets.m1_fwhm - 1.0, m2 / targets.m2_fwhm - 1.0;
            } catch (const Error&) {
                r << 1.0, 1.0;
            }
            return r;
        };
        Eigen::VectorXd start(2);
        start << std::log(std::min(guess.width_e, width_cap)), std::log(std::min(guess.width_o, width_cap));
        fit::LmOptions lm_options;
        lm_options.max_iterations = options.max_iterations;
        lm_options.step_tolerance = 1e-10;
        const auto lm = fit::levenberg_marquardt(res, start, Eigen::VectorXd::Ones(2), lm_options);
        const double residual = lm.residuals.cwiseAbs().maxCoeff();
        best_residual = std::min(best_residual, residual);

        const double we = std::exp(lm.parameters[0]);
        const double wo = std::exp(lm.parameters[1]);
        if (residual <= options.tolerance && we <= width_cap && wo <= width_cap) {
            params.width_e = we;
            params.width_o = wo;
            const auto [m1, m2] = measure(we, wo);
            CalibrationResult out;
            out.params = params;
            out.residual = residual;
            out.m1_fwhm = m1;
            out.m2_fwhm = m2;
            out.pump_adjusted = attempt > 0;
            out.iterations = lm.iterations;
            return out;
        }
        if (!options.allow_pump_adjustment) break;
    }
    throw NumericalError("calibrate_to_marginals: no convergence; best relative marginal mismatch " +
                         std::to_string(best_residual));
}

void SpectralFilter::validate() const {
    if (shape == Shape::identity) return;
    if (!(center > 0.0) || !(fwhm > 0.0))
        throw InvalidArgument("SpectralFilter: center and fwhm must be positive");
}

double SpectralFilter::transmission(double lambda_nm) const {
    switch (shape) {
        case Shape::identity:
            return 1.0;
        case Shape::gaussian: {
            const double z = (lambda_nm - center) / fwhm;
            return std::exp(-4.0 * std::log(2.0) * z * z);
        }
        case Shape::rectangular:
            return std::abs(lambda_nm - center) <= 0.5 * fwhm ? 1.0 : 0.0;
    }
    return 1.0;
}

JointAmplitude attenuate(const JointAmplitude& f, const SpectralFilter& arm1, const SpectralFilter& arm2) {
    arm1.validate();
    arm2.validate();
    JointAmplitude out{f.grid, f.values, false};
    const auto& l1 = f.grid.lambda1();
    const auto& l2 = f.grid.lambda2();
    for (std::size_t i = 0; i < l1.size(); ++i) {
        const double t1 = arm1.transmission(l1[i]);
        for (std::size_t j = 0; j < l2.size(); ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *=
                std::sqrt(t1 * arm2.transmission(l2[j]));
        }
    }
    return out;
}

FilterResult apply_filter(const JointAmplitude& f, const SpectralFilter& arm1, const SpectralFilter& arm2) {
    const double before = f.norm_squared();
    JointAmplitude out = attenuate(f, arm1, arm2);
    const double after = out.norm_squared();
    if (!(after > 0.0) || !(before > 0.0))
        throw NumericalError("apply_filter: filters remove all of the amplitude");
    out.values /= std::sqrt(after);
    out.normalized = true;
    return FilterResult{std::move(out), after / before};
}

double difference_frequency_rms(const JointAmplitude& f) {
    const Eigen::MatrixXd p = cell_probabilities(f);
    const Eigen::VectorXd w1 = f.grid.omega1(), w2 = f.grid.omega2();
    double total = 0.0, mean = 0.0, second = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            const double d = w2[j] - w1[i];
            total += p(i, j);
            mean += p(i, j) * d;
            second += p(i, j) * d * d;
        }
    }
    mean /= total;
    return std::sqrt(std::max(second / total - mean * mean, 0.0));
}

}  // namespace spdc
