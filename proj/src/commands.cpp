#include "spdc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"
#include "spdc/multipair.hpp"
#include "spdc/spectral_grid.hpp"
#include "spdc/units.hpp"

namespace spdc::cli {

using config::RunConfig;

void Summary::add(const std::string& key, double value) { add(key, format_double(value)); }

void Summary::add(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

std::optional<std::string> Summary::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

double Summary::number(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw InvalidArgument("summary has no key '" + key + "'");
    return parse_double(*v);
}

std::string Summary::machine_block() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
}

std::string Summary::human_readable() const {
    std::size_t width = 0;
    for (const auto& e : entries_) width = std::max(width, e.first.size());
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << "  " << k << std::string(width - k.size(), ' ') << " : " << v << '\n';
    return out.str();
}

namespace {

JsaModel model_from(const std::string& name) {
    return name == "gaussian-pump-sinc" ? JsaModel::gaussian_pump_sinc : JsaModel::double_gaussian;
}

BiphotonState state_for(const JointAmplitude& f, const RunConfig& cfg, double tau) {
    const double delta = units::deg_to_rad(cfg.number("state.delta"));
    BiphotonState s = cfg.text("state.topology") == "compensated" ? make_compensated(f, delta, tau)
                                                                   : make_uncompensated(f, delta);
    return with_coherence(std::move(s), cfg.number("state.coherence"));
}

double two_setting_visibility(double high, double low) { return (high - low) / (high + low); }

void add_bounds(Summary& s, const std::string& prefix, double c_max, double c_min, double c_acc) {
    const auto b = multipair::correction_bounds({std::max(c_max, 0.0), std::max(c_min, 0.0), c_acc},
                                                multipair::OverSubtraction::allow);
    s.add(prefix + "_raw", b.v_raw);
    s.add(prefix + "_corrected_low", b.v_low);
    s.add(prefix + "_corrected_high", b.v_high);
    s.add(prefix + "_over_subtracted", b.over_subtracted ? "true" : "false");
}

void add_scenario(Summary& s, const Scenario& sc) {
    s.add("width_e_nm", sc.params.width_e);
    s.add("width_o_nm", sc.params.width_o);
    s.add("pump_width_nm", sc.params.pump_width);
    s.add("pump_center_nm", sc.params.pump_center);
    s.add("pump_adjusted", sc.pump_adjusted ? "true" : "false");
    s.add("coherence", sc.state.coherence);
    s.add("reference_visibility", sc.reference_visibility);
    s.add("p_pair", sc.p_pair);
}

std::vector<double> axis_values(const RunConfig& cfg, const std::string& prefix) {
    return uniform_axis(cfg.number(prefix + "_start"), cfg.number(prefix + "_stop"), cfg.number(prefix + "_step"));
}

void attach(io::CurveTable& table, const Summary& s, const std::string& command) {
    table.metadata["command"] = command;
    for (const auto& [k, v] : s.entries()) table.metadata[k] = v;
}

}  // namespace

Scenario build_scenario(const RunConfig& cfg) {
    const SpectralGrid grid = SpectralGrid::uniform(cfg.number("jsa.grid_start"), cfg.number("jsa.grid_stop"),
                                                    cfg.number("jsa.grid_step"));
    JsaParams p;
    p.model = model_from(cfg.text("jsa.model"));
    p.center_e = cfg.number("jsa.center_e");
    p.center_o = cfg.number("jsa.center_o");
    p.pump_width = cfg.number("jsa.pump_width");
    p.sinc_group_delay = cfg.number("jsa.sinc_group_delay");
    bool pump_adjusted = false;
    if (cfg.flag("jsa.calibrate")) {
        if (p.model != JsaModel::double_gaussian)
            throw InvalidArgument("jsa.calibrate requires jsa.model = double-gaussian");
        MarginalTargets targets{cfg.number("jsa.marginal_fwhm_1"), cfg.number("jsa.marginal_fwhm_2"), p.center_e,
                                p.center_o, p.pump_width};
        const auto result = calibrate_to_marginals(targets, grid);
        p = result.params;
        pump_adjusted = result.pump_adjusted;
    } else {
        cfg.require("jsa.width_e");
        cfg.require("jsa.width_o");
        p.width_e = cfg.number("jsa.width_e");
        p.width_o = cfg.number("jsa.width_o");
        p.pump_center = JsaParams::energy_conserving_pump(p.center_e, p.center_o);
    }
    if (cfg.has("jsa.pump_center")) p.pump_center = cfg.number("jsa.pump_center");
    p.validate();

    const JointAmplitude f = build_jsa(p, grid);
    const double coherence = cfg.number("state.coherence");
    const BiphotonState reference =
        with_coherence(make_compensated(f, units::deg_to_rad(cfg.number("state.delta")), 0.0), coherence);
    const double v_ref = two_setting_visibility(coincidence_rate(reference, AnalyzerAngles{45.0, -45.0}),
                                                coincidence_rate(reference, AnalyzerAngles{45.0, 45.0}));
    double p_pair = 0.0;
    if (const auto target = cfg.optional_number("multipair.target_raw_visibility"))
        p_pair = multipair::pair_probability_for_visibility(v_ref, *target);
    else
        p_pair = cfg.number("multipair.p_pair");
    multipair::MultipairModel{p_pair, 1.0, cfg.number("multipair.rep_rate")}.validate();

    return Scenario{p, f, state_for(f, cfg, cfg.number("state.tau")), pump_adjusted, v_ref, p_pair};
}

double composed_rate(const BiphotonState& state, const PathOverlap& overlap, const AnalyzerAngles& angles,
                     double p_pair) {
    const double c = coincidence_rate(state, overlap, angles);
    const double cos_theta = std::clamp(4.0 * ideal_coincidence_rate(state, angles) - 1.0, -1.0, 1.0);
    return c + 0.25 * p_pair * (2.0 + cos_theta);
}

CurveOutput run_dip_scan(const RunConfig& cfg) {
    if (cfg.text("state.topology") != "compensated")
        throw InvalidArgument("dip-scan requires state.topology = compensated");
    const Scenario sc = build_scenario(cfg);
    const AnalyzerAngles bump{45.0, -45.0}, dip{45.0, 45.0};
    const double floor = 0.5 * sc.p_pair;

    CurveOutput out;
    out.table.columns = {"tau_fs", "rate_bump", "rate_dip", "rate_accidental"};
    DelayCurve dip_curve;
    for (double tau : axis_values(cfg, "scan.tau")) {
        const BiphotonState s = state_for(sc.jsa, cfg, tau);
        const PathOverlap ov = path_overlap(s);
        const double rb = composed_rate(s, ov, bump, sc.p_pair);
        const double rd = composed_rate(s, ov, dip, sc.p_pair);
        out.table.rows.push_back({tau, rb, rd, floor});
        dip_curve.tau.push_back(tau);
        dip_curve.rates.push_back(rd);
    }

    const BiphotonState s0 = state_for(sc.jsa, cfg, 0.0);
    const PathOverlap ov0 = path_overlap(s0);
    const double b0 = composed_rate(s0, ov0, bump, sc.p_pair), d0 = composed_rate(s0, ov0, dip, sc.p_pair);

    Summary& s = out.summary;
    add_scenario(s, sc);
    add_bounds(s, "dip_visibility", b0, d0, floor);
    const DipFit fit = fit_dip(dip_curve);
    s.add("dip_fwhm_fs", fit.fwhm);
    s.add("dip_center_fs", fit.center);
    attach(out.table, s, "dip-scan");
    return out;
}

CurveOutput run_polarization_scan(const RunConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    const std::vector<double> alpha2 = axis_values(cfg, "scan.alpha");
    const PathOverlap ov = path_overlap(sc.state);
    const double floor = 0.5 * sc.p_pair;

    CurveOutput out;
    out.table.columns = {"alpha2_deg", "rate_hv", "rate_45", "rate_accidental"};
    std::vector<double> hv, d45;
    for (double a : alpha2) {
        hv.push_back(composed_rate(sc.state, ov, {0.0, a}, sc.p_pair));
        d45.push_back(composed_rate(sc.state, ov, {45.0, a}, sc.p_pair));
        out.table.rows.push_back({a, hv.back(), d45.back(), floor});
    }
    const auto fit_hv = fit_polarization_curve(alpha2, hv);
    const auto fit_45 = fit_polarization_curve(alpha2, d45);

    Summary& s = out.summary;
    add_scenario(s, sc);
    add_bounds(s, "V_HV", fit_hv.maximum(), fit_hv.minimum(), floor);
    add_bounds(s, "V_45", fit_45.maximum(), fit_45.minimum(), floor);
    attach(out.table, s, "polarization-scan");
    return out;
}

CurveOutput run_power_scan(const RunConfig& cfg) {
    double v_hv = 0.0, v_45 = 0.0;
    const auto hv_max = cfg.optional_number("multipair.v_hv_max");
    const auto v45_max = cfg.optional_number("multipair.v_45_max");
    if (hv_max && v45_max) {
        v_hv = *hv_max;
        v_45 = *v45_max;
    } else {
        const Scenario sc = build_scenario(cfg);
        const PathOverlap ov = path_overlap(sc.state);
        const std::vector<double> alpha2 = uniform_axis(0.0, 170.0, 10.0);
        std::vector<double> hv, d45;
        for (double a : alpha2) {
            hv.push_back(coincidence_rate(sc.state, ov, {0.0, a}));
            d45.push_back(coincidence_rate(sc.state, ov, {45.0, a}));
        }
        v_hv = hv_max.value_or(fit_polarization_curve(alpha2, hv).visibility());
        v_45 = v45_max.value_or(fit_polarization_curve(alpha2, d45).visibility());
    }

    const double per_mw = cfg.number("multipair.pair_probability_per_mw");
    const double rep_rate = cfg.number("multipair.rep_rate");
    const std::string model = cfg.text("multipair.visibility_model");
    const auto visibility = [&](double v, double p) {
        const auto r = multipair::visibility_with_double_pairs({p, v, rep_rate});
        return model == "exact" ? r.exact : model == "linear" ? r.linear : r.first_order;
    };

    CurveOutput out;
    out.table.columns = {"power_mW", "p_pair", "V_HV", "V_45"};
    std::vector<multipair::PowerPoint> pts_hv, pts_45;
    for (double power : axis_values(cfg, "multipair.power")) {
        const double p = power * per_mw;
        const double vh = visibility(v_hv, p), v4 = visibility(v_45, p);
        out.table.rows.push_back({power, p, vh, v4});
        pts_hv.push_back({power, vh});
        pts_45.push_back({power, v4});
    }
    const auto fit_hv = multipair::fit_visibility_vs_power(pts_hv);
    const auto fit_45 = multipair::fit_visibility_vs_power(pts_45);

    Summary& s = out.summary;
    s.add("visibility_model", model);
    s.add("pair_probability_per_mw", per_mw);
    s.add("V_HV_max", v_hv);
    s.add("V_45_max", v_45);
    s.add("V_HV_slope_pct_per_mw", fit_hv.slope_pct_per_mw);
    s.add("V_HV_intercept", fit_hv.v_max_at_zero);
    s.add("V_HV_fit_rms", fit_hv.residual_rms);
    s.add("V_45_slope_pct_per_mw", fit_45.slope_pct_per_mw);
    s.add("V_45_intercept", fit_45.v_max_at_zero);
    s.add("V_45_fit_rms", fit_45.residual_rms);
    attach(out.table, s, "power-scan");
    return out;
}

AnalyzerAngles basis_angles(const std::string& basis, const RunConfig& cfg) {
    if (basis == "config") return {cfg.number("state.alpha1"), cfg.number("state.alpha2")};
    if (basis.size() != 2) throw InvalidArgument("unknown basis '" + basis + "'");
    const auto angle = [&](char c) {
        switch (c) {
            case 'V': return 0.0;
            case 'H': return 90.0;
            case '+': return 45.0;
            case '-': return -45.0;
            default: throw InvalidArgument("unknown basis '" + basis + "' (use H, V, + or - per arm)");
        }
    };
    return {angle(basis[0]), angle(basis[1])};
}

GridOutput run_joint_spectrum(const RunConfig& cfg, const std::string& basis, bool accidental) {
    const Scenario sc = build_scenario(cfg);
    ScanConfig scan;
    scan.axis1 = {cfg.number("scan.lambda1_start"), cfg.number("scan.lambda1_stop"), cfg.number("scan.lambda1_step")};
    scan.axis2 = {cfg.number("scan.lambda2_start"), cfg.number("scan.lambda2_stop"), cfg.number("scan.lambda2_step")};
    scan.resolution_fwhm = cfg.number("scan.resolution_fwhm");
    scan.integration_time = cfg.number("scan.integration_time");
    scan.peak_rate = cfg.number("scan.peak_rate");
    scan.background_rate = cfg.number("scan.background_rate");
    scan.seed = cfg.integer("scan.seed");
    scan.noiseless = cfg.flag("scan.noiseless");
    scan.p_pair = sc.p_pair;

    GridOutput out;
    if (accidental) {
        out.grid = simulate_accidental_scan(sc.state, scan);
    } else {
        out.grid = simulate_joint_scan(sc.state, basis_angles(basis, cfg), scan);
        out.grid.metadata["basis"] = basis;
    }
    out.grid.metadata["command"] = "joint-spectrum";

    add_scenario(out.summary, sc);
    out.summary.add("basis", out.grid.metadata["basis"]);
    out.summary.add("total_counts", out.grid.total());
    return out;
}

Summary analyze_grids(const std::vector<JointSpectrumGrid>& grids, const std::optional<JointSpectrumGrid>& accidental) {
    if (grids.empty() || grids.size() > 2) throw InvalidArgument("analyze-grid takes one or two grids");
    Summary s;
    const auto& first = grids.front();
    const GridMarginals m = grid_marginals(first);
    double resolution = 0.0;
    if (const auto it = first.metadata.find("resolution_fwhm_nm"); it != first.metadata.end())
        resolution = parse_double(it->second);
    s.add("total_counts", first.total());
    s.add("m1_fwhm_nm", m.fit1.fwhm);
    s.add("m1_fwhm_error_nm", m.fit1.fwhm_error);
    s.add("m1_center_nm", m.fit1.center);
    s.add("m2_fwhm_nm", m.fit2.fwhm);
    s.add("m2_fwhm_error_nm", m.fit2.fwhm_error);
    s.add("m2_center_nm", m.fit2.center);
    if (resolution > 0.0) {
        s.add("resolution_fwhm_nm", resolution);
        s.add("m1_fwhm_deconvolved_nm", std::sqrt(std::max(0.0, m.fit1.fwhm * m.fit1.fwhm - resolution * resolution)));
        s.add("m2_fwhm_deconvolved_nm", std::sqrt(std::max(0.0, m.fit2.fwhm * m.fit2.fwhm - resolution * resolution)));
    }
    if (grids.size() == 2) {
        const auto v = visibility_from_grids(grids[0], grids[1]);
        s.add("visibility", v.visibility);
        s.add("visibility_std_error", v.std_error);
        s.add("fraction_second", event_fraction(grids[1], grids[0]));
        s.add("grid_distance", grid_distance(grids[0], grids[1]));
        if (accidental) {
            if (accidental->lambda1 != first.lambda1 || accidental->lambda2 != first.lambda2)
                throw InvalidArgument("analyze-grid: accidental grid axes do not match");
            add_bounds(s, "visibility", grids[0].total(), grids[1].total(), accidental->total());
        }
    } else if (accidental) {
        throw InvalidArgument("analyze-grid: the correction band needs both a +- and a ++ grid");
    }
    return s;
}

namespace {

void keep(Summary* dst, const Summary& src) {
    if (dst) *dst = src;
}

}  // namespace

void cmd_dip_scan(const RunConfig& cfg, const std::filesystem::path& out, Summary* summary) {
    auto r = run_dip_scan(cfg);
    io::write_curve_csv(out, r.table);
    keep(summary, r.summary);
}

void cmd_polarization_scan(const RunConfig& cfg, const std::filesystem::path& out, Summary* summary) {
    auto r = run_polarization_scan(cfg);
    io::write_curve_csv(out, r.table);
    keep(summary, r.summary);
}

void cmd_power_scan(const RunConfig& cfg, const std::filesystem::path& out, Summary* summary) {
    auto r = run_power_scan(cfg);
    io::write_curve_csv(out, r.table);
    keep(summary, r.summary);
}

void cmd_joint_spectrum(const RunConfig& cfg, const std::string& basis, bool accidental,
                        const std::filesystem::path& out, Summary* summary) {
    auto r = run_joint_spectrum(cfg, basis, accidental);
    io::write_grid_csv(out, r.grid);
    keep(summary, r.summary);
}

Summary cmd_analyze_grid(const std::vector<std::filesystem::path>& paths,
                         const std::optional<std::filesystem::path>& accidental, const std::filesystem::path& out) {
    std::vector<JointSpectrumGrid> grids;
    for (const auto& p : paths) grids.push_back(io::read_grid_csv(p));
    std::optional<JointSpectrumGrid> acc;
    if (accidental) acc = io::read_grid_csv(*accidental);
    Summary s = analyze_grids(grids, acc);
    io::write_text_file(out, s.machine_block());
    return s;
}

ExitCode exit_code_for_current_exception() noexcept {
    try {
        throw;
    } catch (const ParseError&) {
        return exit_config;
    } catch (const InvalidArgument&) {
        return exit_config;
    } catch (const NumericalError&) {
        return exit_numerical;
    } catch (const IoError&) {
        return exit_io;
    } catch (...) {
        return exit_failure;
    }
}

}  // namespace spdc::cli
