#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spdc/measurement.hpp"

namespace spdc::io {

// Grid files: UTF-8 CSV with `# key=value` comment lines, then the header
// `lambda1_nm,lambda2_nm,counts` and one row per cell, λ1-major.

inline constexpr const char* grid_header = "lambda1_nm,lambda2_nm,counts";

void write_grid_csv(std::ostream& out, const JointSpectrumGrid& grid);
void write_grid_csv(const std::filesystem::path& path, const JointSpectrumGrid& grid);

/// `source` names the input in error messages.
JointSpectrumGrid read_grid_csv(std::istream& in, const std::string& source = "<stream>");
JointSpectrumGrid read_grid_csv(const std::filesystem::path& path);

/// Column-oriented curve with a header row and one record per abscissa.
struct CurveTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;

    std::vector<double> column(const std::string& name) const;
};

void write_curve_csv(std::ostream& out, const CurveTable& table);
void write_curve_csv(const std::filesystem::path& path, const CurveTable& table);
CurveTable read_curve_csv(std::istream& in, const std::string& source = "<stream>");
CurveTable read_curve_csv(const std::filesystem::path& path);

/// Writes text atomically enough for CLI use; throws IoError with the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace spdc::io
