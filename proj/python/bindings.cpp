#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spdc/commands.hpp"
#include "spdc/config.hpp"
#include "spdc/csv_io.hpp"
#include "spdc/errors.hpp"
#include "spdc/interferometer.hpp"
#include "spdc/jsa.hpp"
#include "spdc/measurement.hpp"
#include "spdc/multipair.hpp"

namespace py = pybind11;
using namespace spdc;

namespace {

py::dict to_dict(const cli::Summary& s) {
    py::dict d;
    for (const auto& [k, v] : s.entries()) d[py::str(k)] = v;
    return d;
}

py::dict curve_dict(const cli::CurveOutput& out) {
    py::dict columns;
    for (std::size_t c = 0; c < out.table.columns.size(); ++c) {
        std::vector<double> values;
        for (const auto& row : out.table.rows) values.push_back(row[c]);
        columns[py::str(out.table.columns[c])] = values;
    }
    py::dict d;
    d["columns"] = columns;
    d["summary"] = to_dict(out.summary);
    return d;
}

config::RunConfig make_config(const std::string& text, const std::vector<std::string>& overrides) {
    std::istringstream in(text);
    auto cfg = config::RunConfig::parse(in, "<python>");
    for (const auto& o : overrides) cfg.apply_override(o);
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral-compensation simulator core";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());

    py::enum_<JsaModel>(m, "JsaModel")
        .value("double_gaussian", JsaModel::double_gaussian)
        .value("gaussian_pump_sinc", JsaModel::gaussian_pump_sinc);

    py::class_<JsaParams>(m, "JsaParams")
        .def(py::init<>())
        .def_readwrite("center_e", &JsaParams::center_e)
        .def_readwrite("center_o", &JsaParams::center_o)
        .def_readwrite("width_e", &JsaParams::width_e)
        .def_readwrite("width_o", &JsaParams::width_o)
        .def_readwrite("pump_center", &JsaParams::pump_center)
        .def_readwrite("pump_width", &JsaParams::pump_width)
        .def_readwrite("model", &JsaParams::model)
        .def_readwrite("sinc_group_delay", &JsaParams::sinc_group_delay)
        .def_static("energy_conserving_pump", &JsaParams::energy_conserving_pump);

    py::class_<SpectralGrid>(m, "SpectralGrid")
        .def_static("uniform", py::overload_cast<double, double, double>(&SpectralGrid::uniform))
        .def_property_readonly("lambda1", &SpectralGrid::lambda1)
        .def_property_readonly("lambda2", &SpectralGrid::lambda2);

    py::class_<JointAmplitude>(m, "JointAmplitude")
        .def_readonly("grid", &JointAmplitude::grid)
        .def_readonly("values", &JointAmplitude::values)
        .def("norm_squared", &JointAmplitude::norm_squared);

    m.def("build_jsa", &build_jsa, py::arg("params"), py::arg("grid"));
    m.def("swap_arms", &swap_arms);
    m.def("overlap_integral", &overlap_integral, py::arg("f"), py::arg("g"), py::arg("tau_fs") = 0.0);
    m.def("cell_probabilities", &cell_probabilities);
    m.def("marginal_fwhms", &marginal_fwhms);

    py::class_<MarginalTargets>(m, "MarginalTargets")
        .def(py::init<>())
        .def_readwrite("m1_fwhm", &MarginalTargets::m1_fwhm)
        .def_readwrite("m2_fwhm", &MarginalTargets::m2_fwhm)
        .def_readwrite("center1", &MarginalTargets::center1)
        .def_readwrite("center2", &MarginalTargets::center2)
        .def_readwrite("pump_width", &MarginalTargets::pump_width);
    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("params", &CalibrationResult::params)
        .def_readonly("residual", &CalibrationResult::residual)
        .def_readonly("m1_fwhm", &CalibrationResult::m1_fwhm)
        .def_readonly("m2_fwhm", &CalibrationResult::m2_fwhm)
        .def_readonly("pump_adjusted", &CalibrationResult::pump_adjusted);
    m.def("calibrate_to_marginals", [](const MarginalTargets& t, const SpectralGrid& g) {
        return calibrate_to_marginals(t, g);
    });

    py::enum_<Topology>(m, "Topology")
        .value("uncompensated", Topology::uncompensated)
        .value("compensated", Topology::compensated);
    py::class_<BiphotonState>(m, "BiphotonState")
        .def_readonly("delta", &BiphotonState::delta)
        .def_readonly("tau", &BiphotonState::tau)
        .def_readonly("topology", &BiphotonState::topology)
        .def_readonly("coherence", &BiphotonState::coherence);
    py::class_<AnalyzerAngles>(m, "AnalyzerAngles")
        .def(py::init<double, double>(), py::arg("alpha1") = 0.0, py::arg("alpha2") = 0.0)
        .def_readwrite("alpha1", &AnalyzerAngles::alpha1)
        .def_readwrite("alpha2", &AnalyzerAngles::alpha2);

    m.def("make_uncompensated", &make_uncompensated, py::arg("f"), py::arg("delta"));
    m.def("make_compensated", &make_compensated, py::arg("f"), py::arg("delta"), py::arg("tau_fs") = 0.0);
    m.def("with_coherence", &with_coherence);
    m.def("coincidence_rate", [](const BiphotonState& s, const AnalyzerAngles& a) { return coincidence_rate(s, a); });
    m.def("polarization_visibility", [](const BiphotonState& s, double alpha1, const std::vector<double>& alpha2) {
        return polarization_scan(s, alpha1, alpha2).visibility();
    });
    m.def("delay_scan", [](const JointAmplitude& f, double delta, const AnalyzerAngles& a,
                           const std::vector<double>& taus) { return delay_scan(f, delta, a, taus).rates; });
    m.def("dip_fwhm", [](const std::vector<double>& taus, const std::vector<double>& rates) {
        return dip_fwhm(DelayCurve{taus, rates});
    });

    m.def("visibility_with_double_pairs", [](double p, double v) {
        const auto r = multipair::visibility_with_double_pairs({p, v});
        return py::make_tuple(r.exact, r.linear, r.first_order);
    });
    m.def("pair_probability_for_visibility", &multipair::pair_probability_for_visibility);
    m.def("p_pair_from_singles", [](double s, double eta, double rep) {
        return multipair::p_pair_from_singles(s, {eta}, rep);
    });
    m.def("accidental_rate", &multipair::accidental_rate);
    m.def("correction_bounds", [](double c_max, double c_min, double c_acc, bool allow_over_subtraction) {
        const auto b = multipair::correction_bounds(
            {c_max, c_min, c_acc},
            allow_over_subtraction ? multipair::OverSubtraction::allow : multipair::OverSubtraction::reject);
        return py::make_tuple(b.v_raw, b.v_low, b.v_high);
    }, py::arg("c_max"), py::arg("c_min"), py::arg("c_acc"), py::arg("allow_over_subtraction") = false);
    m.def("fit_visibility_vs_power", [](const std::vector<double>& power, const std::vector<double>& v) {
        if (power.size() != v.size()) throw InvalidArgument("power and visibility lengths differ");
        std::vector<multipair::PowerPoint> pts;
        for (std::size_t i = 0; i < power.size(); ++i) pts.push_back({power[i], v[i]});
        const auto f = multipair::fit_visibility_vs_power(pts);
        return py::make_tuple(f.slope_pct_per_mw, f.v_max_at_zero);
    });

    py::class_<JointSpectrumGrid>(m, "JointSpectrumGrid")
        .def_readonly("lambda1", &JointSpectrumGrid::lambda1)
        .def_readonly("lambda2", &JointSpectrumGrid::lambda2)
        .def_readonly("counts", &JointSpectrumGrid::counts)
        .def_readonly("metadata", &JointSpectrumGrid::metadata)
        .def("total", &JointSpectrumGrid::total);
    m.def("read_grid_csv", py::overload_cast<const std::filesystem::path&>(&io::read_grid_csv));
    m.def("write_grid_csv",
          py::overload_cast<const std::filesystem::path&, const JointSpectrumGrid&>(&io::write_grid_csv));
    m.def("visibility_from_grids", [](const JointSpectrumGrid& pm, const JointSpectrumGrid& pp) {
        const auto v = visibility_from_grids(pm, pp);
        return py::make_tuple(v.visibility, v.std_error);
    });
    m.def("event_fraction", &event_fraction);
    m.def("grid_distance", &grid_distance);

    m.def("effective_config", [](const std::string& text, const std::vector<std::string>& overrides) {
        return make_config(text, overrides).emit();
    }, py::arg("text"), py::arg("overrides") = std::vector<std::string>{});
    m.def("dip_scan", [](const std::string& text, const std::vector<std::string>& overrides) {
        return curve_dict(cli::run_dip_scan(make_config(text, overrides)));
    }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{});
    m.def("polarization_scan", [](const std::string& text, const std::vector<std::string>& overrides) {
        return curve_dict(cli::run_polarization_scan(make_config(text, overrides)));
    }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{});
    m.def("power_scan", [](const std::string& text, const std::vector<std::string>& overrides) {
        return curve_dict(cli::run_power_scan(make_config(text, overrides)));
    }, py::arg("config"), py::arg("overrides") = std::vector<std::string>{});
    m.def("joint_spectrum", [](const std::string& text, const std::string& basis, bool accidental,
                               const std::vector<std::string>& overrides) {
        return cli::run_joint_spectrum(make_config(text, overrides), basis, accidental).grid;
    }, py::arg("config"), py::arg("basis") = "config", py::arg("accidental") = false,
       py::arg("overrides") = std::vector<std::string>{});
    m.def("analyze_grids", [](const std::vector<JointSpectrumGrid>& grids,
                              const std::optional<JointSpectrumGrid>& accidental) {
        return to_dict(cli::analyze_grids(grids, accidental));
    }, py::arg("grids"), py::arg("accidental") = py::none());
}
