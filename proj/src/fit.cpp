#include "spdc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::fit {

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFunction& residuals, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& scale, Eigen::Index m) {
    Eigen::MatrixXd jac(m, x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = 1e-6 * std::max(std::abs(x[k]), std::abs(scale[k]));
        Eigen::VectorXd xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        jac.col(k) = (residuals(xp) - residuals(xm)) / (2.0 * h);
    }
    return jac;
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFunction& residuals, Eigen::VectorXd start,
                             const Eigen::VectorXd& scale, const LmOptions& options) {
    LmResult out;
    Eigen::VectorXd x = std::move(start);
    Eigen::VectorXd r = residuals(x);
    double cost = 0.5 * r.squaredNorm();
    double lambda = 1e-3;
    Eigen::MatrixXd jac = numeric_jacobian(residuals, x, scale, r.size());

    for (int it = 1; it <= options.max_iterations; ++it) {
        out.iterations = it;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.cwiseAbs().maxCoeff() == 0.0) {
            out.converged = true;
            break;
        }

        bool improved = false;
        for (int attempt = 0; attempt < 40 && !improved; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index k = 0; k < damped.rows(); ++k)
                damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            const Eigen::VectorXd trial = x + step;
            const Eigen::VectorXd r_trial = residuals(trial);
            const double trial_cost = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm()
                                                          : std::numeric_limits<double>::infinity();
            if (trial_cost <= cost) {
                const double decrease = cost - trial_cost;
                const double rel_step =
                    (step.array().abs() / (x.array().abs() + scale.array().abs())).maxCoeff();
                x = trial;
                r = r_trial;
                const double old_cost = cost;
                cost = trial_cost;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
                if (decrease <= options.cost_tolerance * old_cost ||
                    rel_step <= options.step_tolerance || cost == 0.0) {
                    out.converged = true;
                }
            } else {
                lambda *= 4.0;
            }
        }
        if (!improved) {
            // No descent direction left at machine precision: stationary point.
            out.converged = true;
        }
        if (out.converged) break;
        jac = numeric_jacobian(residuals, x, scale, r.size());
    }

    out.parameters = x;
    out.residuals = r;
    out.cost = cost;
    out.jacobian = numeric_jacobian(residuals, x, scale, r.size());
    return out;
}

Eigen::VectorXd parameter_errors(const LmResult& result) {
    const auto m = result.residuals.size();
    const auto n = result.parameters.size();
    Eigen::VectorXd err = Eigen::VectorXd::Zero(n);
    if (m <= n) return err;
    const double s2 = result.residuals.squaredNorm() / static_cast<double>(m - n);
    const Eigen::MatrixXd jtj = result.jacobian.transpose() * result.jacobian;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
    const Eigen::MatrixXd cov = cod.pseudoInverse() * s2;
    for (Eigen::Index k = 0; k < n; ++k) err[k] = std::sqrt(std::max(cov(k, k), 0.0));
    return err;
}

double GaussianFit::fwhm() const { return units::fwhm_per_sigma * std::abs(sigma); }
double GaussianFit::fwhm_error() const { return units::fwhm_per_sigma * sigma_error; }

GaussianFit fit_gaussian(std::span<const double> x, std::span<const double> y, Polarity polarity) {
    if (x.size() != y.size()) throw InvalidArgument("fit_gaussian: x and y differ in length");
    if (x.size() < 5) throw InvalidArgument("fit_gaussian: need at least 5 samples");

    const auto n = x.size();
    const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    const double y_min = *min_it, y_max = *max_it;

    if (polarity == Polarity::automatic) {
        std::vector<double> sorted(y.begin(), y.end());
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(n / 2), sorted.end());
        const double median = sorted[n / 2];
        polarity = (y_max - median >= median - y_min) ? Polarity::peak : Polarity::dip;
    }
    const bool dip = polarity == Polarity::dip;
    const auto extreme = dip ? min_it : max_it;
    const auto ext_index = static_cast<std::size_t>(extreme - y.begin());
    const double offset0 = dip ? y_max : y_min;
    const double amplitude0 = *extreme - offset0;

    // Width guess from the half-level extent around the extremum.
    const double half = offset0 + 0.5 * amplitude0;
    auto beyond_half = [&](std::size_t i) { return dip ? y[i] > half : y[i] < half; };
    std::size_t lo = ext_index, hi = ext_index;
    while (lo > 0 && !beyond_half(lo - 1)) --lo;
    while (hi + 1 < n && !beyond_half(hi + 1)) ++hi;
    const double range = x[n - 1] - x[0];
    double sigma0 = (x[hi] - x[lo] + (x[1] - x[0])) / units::fwhm_per_sigma;
    if (!(sigma0 > 0.0)) sigma0 = range / 10.0;

    const ResidualFunction model = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (x[i] - p[1]) / p[2];
            r[static_cast<Eigen::Index>(i)] = p[3] + p[0] * std::exp(-0.5 * z * z) - y[i];
        }
        return r;
    };

    Eigen::VectorXd start(4);
    start << amplitude0, x[ext_index], sigma0, offset0;
    Eigen::VectorXd scale(4);
    const double y_scale = std::max(std::abs(amplitude0), 1e-300);
    scale << y_scale, std::max(sigma0, 1e-12), std::max(sigma0, 1e-12), y_scale;

    const LmResult lm = levenberg_marquardt(model, start, scale);
    const Eigen::VectorXd err = parameter_errors(lm);

    GaussianFit out;
    out.amplitude = lm.parameters[0];
    out.center = lm.parameters[1];
    out.sigma = std::abs(lm.parameters[2]);
    out.offset = lm.parameters[3];
    out.amplitude_error = err[0];
    out.center_error = err[1];
    out.sigma_error = err[2];
    out.residual_rms = std::sqrt(lm.residuals.squaredNorm() / static_cast<double>(n));
    out.iterations = lm.iterations;
    out.converged = lm.converged && lm.parameters.allFinite();
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("fit_line: x and y differ in length");
    const auto n = x.size();
    if (n < 2) throw InvalidArgument("fit_line: need at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_line: rank-deficient design (all x equal)");

    LineFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (out.intercept + out.slope * x[i]);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return out;
}

SinusoidFit fit_sinusoid(std::span<const double> angles_deg, std::span<const double> values) {
    if (angles_deg.size() != values.size())
        throw InvalidArgument("fit_sinusoid: angles and values differ in length");
    const auto n = static_cast<Eigen::Index>(values.size());
    if (n < 3) throw InvalidArgument("fit_sinusoid: need at least three samples");

    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = 2.0 * units::deg_to_rad(angles_deg[static_cast<std::size_t>(i)]);
        design(i, 0) = 1.0;
        design(i, 1) = std::cos(t);
        design(i, 2) = std::sin(t);
        rhs[i] = values[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 3) throw InvalidArgument("fit_sinusoid: angles do not resolve the 180° period");
    const Eigen::VectorXd c = qr.solve(rhs);

    SinusoidFit out;
    out.offset = c[0];
    out.amplitude = std::hypot(c[1], c[2]);
    double phase = 0.5 * units::rad_to_deg(std::atan2(c[2], c[1]));
    if (phase < 0.0) phase += 180.0;
    if (phase >= 180.0) phase -= 180.0;
    out.phase_deg = phase;
    out.residual_rms = std::sqrt((design * c - rhs).squaredNorm() / static_cast<double>(n));
    return out;
}

}  // namespace spdc::fit
