#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdc/commands.hpp"
#include "spdc/config.hpp"

namespace {

using spdc::cli::Summary;

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool noiseless = false;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
    auto* c = cmd->add_option("--config", o.config_path, "configuration file");
    if (config_required) c->required();
    cmd->add_option("--set", o.overrides, "override section.key=value (repeatable)");
    cmd->add_option("--seed", o.seed, "random seed (overrides scan.seed)");
    cmd->add_flag("--noiseless", o.noiseless, "emit expected counts instead of Poisson draws");
    cmd->add_option("--out", o.out, "output path")->required();
}

spdc::config::RunConfig load_config(const CommonOptions& o) {
    auto cfg = o.config_path.empty() ? spdc::config::RunConfig{} : spdc::config::RunConfig::load(o.config_path);
    for (const auto& assignment : o.overrides) cfg.apply_override(assignment);
    if (o.seed) cfg.apply_override("scan.seed=" + std::to_string(*o.seed));
    if (o.noiseless) cfg.apply_override("scan.noiseless=true");
    return cfg;
}

void report(const std::string& title, const Summary& s) {
    std::cout << title << '\n' << s.human_readable() << "--- summary ---\n" << s.machine_block() << "--- end ---\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for spectrally compensated polarization-entangled photon pairs"};
    app.require_subcommand(1);

    CommonOptions dip, pol, power, joint, analyze;
    std::string basis = "config";
    bool accidental = false;
    std::vector<std::string> grid_paths;
    std::string accidental_grid;

    auto* dip_cmd = app.add_subcommand("dip-scan", "coincidence rates versus arm delay in the ±45° basis");
    add_common(dip_cmd, dip, true);
    auto* pol_cmd = app.add_subcommand("polarization-scan", "coincidence rates versus analyzer angle");
    add_common(pol_cmd, pol, true);
    auto* power_cmd = app.add_subcommand("power-scan", "visibilities versus pump power");
    add_common(power_cmd, power, true);
    auto* joint_cmd = app.add_subcommand("joint-spectrum", "simulated joint-spectrum grid");
    add_common(joint_cmd, joint, true);
    joint_cmd->add_option("--basis", basis, "analyzer setting: HH, HV, VH, VV, ++, +-, -+, -- or config");
    joint_cmd->add_flag("--accidental", accidental, "simulate consecutive-pulse coincidences instead");
    auto* analyze_cmd = app.add_subcommand("analyze-grid", "marginals, visibility and fractions of grid files");
    add_common(analyze_cmd, analyze, false);
    analyze_cmd->add_option("grids", grid_paths, "+- grid, optionally followed by the ++ grid")->required();
    analyze_cmd->add_option("--accidental", accidental_grid, "consecutive-pulse grid for the correction band");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : spdc::cli::exit_config;
    }

    try {
        Summary s;
        if (*dip_cmd) {
            spdc::cli::cmd_dip_scan(load_config(dip), dip.out, &s);
            report("dip-scan", s);
        } else if (*pol_cmd) {
            spdc::cli::cmd_polarization_scan(load_config(pol), pol.out, &s);
            report("polarization-scan", s);
        } else if (*power_cmd) {
            spdc::cli::cmd_power_scan(load_config(power), power.out, &s);
            report("power-scan", s);
        } else if (*joint_cmd) {
            spdc::cli::cmd_joint_spectrum(load_config(joint), basis, accidental, joint.out, &s);
            report("joint-spectrum", s);
        } else if (*analyze_cmd) {
            std::vector<std::filesystem::path> paths(grid_paths.begin(), grid_paths.end());
            std::optional<std::filesystem::path> acc;
            if (!accidental_grid.empty()) acc = accidental_grid;
            report("analyze-grid", spdc::cli::cmd_analyze_grid(paths, acc, analyze.out));
        }
        return spdc::cli::exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return spdc::cli::exit_code_for_current_exception();
    }
}
