#include "spdc/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"

namespace spdc::io {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void write_metadata(std::ostream& out, const std::map<std::string, std::string>& metadata) {
    for (const auto& [key, value] : metadata) out << "# " << key << '=' << value << '\n';
}

// Consumes a `# key=value` line into metadata; other comments are ignored.
void read_metadata(const std::string& line, std::map<std::string, std::string>& metadata) {
    const std::string body = trim(line.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string::npos) return;
    metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

double parse_field(const std::string& text, const std::string& source, int line, int column) {
    try {
        return parse_double(text);
    } catch (const InvalidArgument&) {
        throw ParseError(source, line, column, "malformed number '" + text + "'");
    }
}

}  // namespace

void write_grid_csv(std::ostream& out, const JointSpectrumGrid& grid) {
    write_metadata(out, grid.metadata);
    out << grid_header << '\n';
    for (std::size_t i = 0; i < grid.lambda1.size(); ++i) {
        for (std::size_t j = 0; j < grid.lambda2.size(); ++j) {
            out << format_double(grid.lambda1[i]) << ',' << format_double(grid.lambda2[j]) << ','
                << format_double(grid.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                << '\n';
        }
    }
}

void write_grid_csv(const std::filesystem::path& path, const JointSpectrumGrid& grid) {
    auto out = open_output(path);
    write_grid_csv(out, grid);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

JointSpectrumGrid read_grid_csv(std::istream& in, const std::string& source) {
    JointSpectrumGrid grid;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    struct Row {
        double l1, l2, counts;
        int line;
    };
    std::vector<Row> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            read_metadata(line, grid.metadata);
            continue;
        }
        if (!header_seen) {
            if (trim(line) != grid_header)
                throw ParseError(source, line_no, 1, std::string("expected header '") + grid_header + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw ParseError(source, line_no, 1, "expected 3 fields, found " + std::to_string(fields.size()));
        Row r{parse_field(fields[0], source, line_no, 1), parse_field(fields[1], source, line_no, 2),
              parse_field(fields[2], source, line_no, 3), line_no};
        if (!(r.counts >= 0.0)) throw ParseError(source, line_no, 3, "counts must be non-negative");
        rows.push_back(r);
    }
    if (!header_seen) throw ParseError(source, line_no, 0, "missing header line");
    if (rows.empty()) throw ParseError(source, line_no, 0, "grid has no data rows");

    for (const auto& r : rows) {
        if (grid.lambda1.empty() || r.l1 != grid.lambda1.back()) {
            if (!grid.lambda1.empty() && r.l1 < grid.lambda1.back())
                throw ParseError(source, r.line, 1, "rows are not ordered by lambda1");
            grid.lambda1.push_back(r.l1);
        }
        if (grid.lambda1.size() == 1) grid.lambda2.push_back(r.l2);
    }
    const std::size_t n1 = grid.lambda1.size(), n2 = grid.lambda2.size();
    if (rows.size() != n1 * n2)
        throw ParseError(source, rows.back().line, 0, "row count is not lambda1 × lambda2");
    grid.counts.resize(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = k / n2, j = k % n2;
        if (rows[k].l1 != grid.lambda1[i] || rows[k].l2 != grid.lambda2[j])
            throw ParseError(source, rows[k].line, 1, "cell out of row-major (lambda1, lambda2) order");
        grid.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[k].counts;
    }
    if ((n1 > 1 && !is_uniform_axis(grid.lambda1)) || (n2 > 1 && !is_uniform_axis(grid.lambda2)))
        throw ParseError(source, rows.front().line, 0, "grid axes are not uniform");
    return grid;
}

JointSpectrumGrid read_grid_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_grid_csv(in, path.string());
}

std::vector<double> CurveTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidArgument("CurveTable: no column '" + name + "'");
    const auto k = static_cast<std::size_t>(it - columns.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

void write_curve_csv(std::ostream& out, const CurveTable& table) {
    write_metadata(out, table.metadata);
    for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw InvalidArgument("write_curve_csv: ragged row");
        for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
        out << '\n';
    }
}

void write_curve_csv(const std::filesystem::path& path, const CurveTable& table) {
    auto out = open_output(path);
    write_curve_csv(out, table);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

CurveTable read_curve_csv(std::istream& in, const std::string& source) {
    CurveTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            read_metadata(line, table.metadata);
            continue;
        }
        const auto fields = split(line, ',');
        if (table.columns.empty()) {
            table.columns = fields;
            continue;
        }
        if (fields.size() != table.columns.size())
            throw ParseError(source, line_no, 1,
                             "expected " + std::to_string(table.columns.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t k = 0; k < fields.size(); ++k)
            row.push_back(parse_field(fields[k], source, line_no, static_cast<int>(k + 1)));
        table.rows.push_back(std::move(row));
    }
    if (table.columns.empty()) throw ParseError(source, line_no, 0, "missing header line");
    return table;
}

CurveTable read_curve_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_curve_csv(in, path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace spdc::io
