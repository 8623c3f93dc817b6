#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spdc/config.hpp"
#include "spdc/csv_io.hpp"
#include "spdc/interferometer.hpp"
#include "spdc/measurement.hpp"

namespace spdc::cli {

/// Ordered key=value results of a command.
class Summary {
public:
    void add(const std::string& key, double value);
    void add(const std::string& key, const std::string& value);

    std::optional<std::string> get(const std::string& key) const;
    double number(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    /// `key=value` lines.
    std::string machine_block() const;
    /// Aligned `key : value` lines for people.
    std::string human_readable() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// State and pair probability assembled from a configuration.
struct Scenario {
    JsaParams params;
    JointAmplitude jsa;
    BiphotonState state;
    bool pump_adjusted = false;
    /// ±45° visibility of the compensated source at τ = 0, no double pairs.
    double reference_visibility = 1.0;
    double p_pair = 0.0;
};

Scenario build_scenario(const config::RunConfig& cfg);

/// Per-pair coincidence rate including the double-pair term
/// p·(2 + cos θ_eff)/4 with cos θ_eff from the ideal rate at the same setting.
double composed_rate(const BiphotonState& state, const PathOverlap& overlap, const AnalyzerAngles& angles,
                     double p_pair);

struct CurveOutput {
    io::CurveTable table;
    Summary summary;
};

struct GridOutput {
    JointSpectrumGrid grid;
    Summary summary;
};

CurveOutput run_dip_scan(const config::RunConfig& cfg);
CurveOutput run_polarization_scan(const config::RunConfig& cfg);
CurveOutput run_power_scan(const config::RunConfig& cfg);

/// Basis labels: HH, HV, VH, VV, ++, +-, -+, --, or "config" for
/// state.alpha1/alpha2.
AnalyzerAngles basis_angles(const std::string& basis, const config::RunConfig& cfg);
GridOutput run_joint_spectrum(const config::RunConfig& cfg, const std::string& basis, bool accidental);

/// `grids[0]` is the +− (or reference) grid; the optional `grids[1]` is the
/// ++ grid. `accidental` enables the correction band.
Summary analyze_grids(const std::vector<JointSpectrumGrid>& grids,
                      const std::optional<JointSpectrumGrid>& accidental);

void cmd_dip_scan(const config::RunConfig& cfg, const std::filesystem::path& out, Summary* summary = nullptr);
void cmd_polarization_scan(const config::RunConfig& cfg, const std::filesystem::path& out,
                           Summary* summary = nullptr);
void cmd_power_scan(const config::RunConfig& cfg, const std::filesystem::path& out, Summary* summary = nullptr);
void cmd_joint_spectrum(const config::RunConfig& cfg, const std::string& basis, bool accidental,
                        const std::filesystem::path& out, Summary* summary = nullptr);
Summary cmd_analyze_grid(const std::vector<std::filesystem::path>& paths,
                         const std::optional<std::filesystem::path>& accidental,
                         const std::filesystem::path& out);

enum ExitCode { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_numerical = 3, exit_io = 4 };

/// Maps the exception currently being handled to an exit code.
ExitCode exit_code_for_current_exception() noexcept;

}  // namespace spdc::cli
