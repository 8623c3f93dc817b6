#include "spdc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"

namespace spdc::config {

namespace {

using K = ValueKind;

const std::vector<KeySpec> kSchema = {
    {"jsa", "model", K::text, "", "double-gaussian", {"double-gaussian", "gaussian-pump-sinc"}},
    {"jsa", "calibrate", K::boolean, "", "false", {}},
    {"jsa", "marginal_fwhm_1", K::number, "nm", "9.2", {}},
    {"jsa", "marginal_fwhm_2", K::number, "nm", "5.8", {}},
    {"jsa", "center_e", K::number, "nm", "781.55", {}},
    {"jsa", "center_o", K::number, "nm", "780.19", {}},
    {"jsa", "width_e", K::number, "nm", "", {}},
    {"jsa", "width_o", K::number, "nm", "", {}},
    {"jsa", "pump_center", K::number, "nm", "", {}},
    {"jsa", "pump_width", K::number, "nm", "1.6", {}},
    {"jsa", "sinc_group_delay", K::number, "fs", "300", {}},
    {"jsa", "grid_start", K::number, "nm", "740", {}},
    {"jsa", "grid_stop", K::number, "nm", "822", {}},
    {"jsa", "grid_step", K::number, "nm", "0.25", {}},

    {"state", "topology", K::text, "", "compensated", {"compensated", "uncompensated"}},
    {"state", "delta", K::number, "deg", "180", {}},
    {"state", "tau", K::number, "fs", "0", {}},
    {"state", "coherence", K::number, "", "1", {}},
    {"state", "alpha1", K::number, "deg", "45", {}},
    {"state", "alpha2", K::number, "deg", "45", {}},

    {"scan", "lambda1_start", K::number, "nm", "761", {}},
    {"scan", "lambda1_stop", K::number, "nm", "802", {}},
    {"scan", "lambda1_step", K::number, "nm", "0.5", {}},
    {"scan", "lambda2_start", K::number, "nm", "760", {}},
    {"scan", "lambda2_stop", K::number, "nm", "800", {}},
    {"scan", "lambda2_step", K::number, "nm", "0.5", {}},
    {"scan", "resolution_fwhm", K::number, "nm", "0.3", {}},
    {"scan", "integration_time", K::number, "s", "30", {}},
    {"scan", "peak_rate", K::number, "Hz", "200000", {}},
    {"scan", "background_rate", K::number, "Hz", "0", {}},
    {"scan", "seed", K::integer, "", "1", {}},
    {"scan", "noiseless", K::boolean, "", "false", {}},
    {"scan", "tau_start", K::number, "fs", "-400", {}},
    {"scan", "tau_stop", K::number, "fs", "400", {}},
    {"scan", "tau_step", K::number, "fs", "10", {}},
    {"scan", "alpha_start", K::number, "deg", "0", {}},
    {"scan", "alpha_stop", K::number, "deg", "180", {}},
    {"scan", "alpha_step", K::number, "deg", "10", {}},

    {"multipair", "p_pair", K::number, "", "0", {}},
    {"multipair", "target_raw_visibility", K::number, "", "", {}},
    {"multipair", "rep_rate", K::number, "Hz", "76000000", {}},
    {"multipair", "power_start", K::number, "mW", "0", {}},
    {"multipair", "power_stop", K::number, "mW", "900", {}},
    {"multipair", "power_step", K::number, "mW", "50", {}},
    {"multipair", "pair_probability_per_mw", K::number, "1/mW", "0.000177", {}},
    {"multipair", "v_hv_max", K::number, "", "", {}},
    {"multipair", "v_45_max", K::number, "", "", {}},
    {"multipair", "visibility_model", K::text, "", "exact", {"exact", "linear", "first-order"}},
};

const KeySpec* find_spec(const std::string& section, const std::string& key) {
    for (const auto& s : kSchema)
        if (s.section == section && s.key == key) return &s;
    return nullptr;
}

const KeySpec& spec_for(const std::string& name) {
    const auto dot = name.find('.');
    const KeySpec* s = dot == std::string::npos ? nullptr : find_spec(name.substr(0, dot), name.substr(dot + 1));
    if (!s) throw InvalidArgument("unknown configuration key '" + name + "'");
    return *s;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Column (1-based) of the first non-blank character at or after `from`.
int column_of(const std::string& line, std::size_t from) {
    const auto p = line.find_first_not_of(" \t", from);
    return static_cast<int>((p == std::string::npos ? line.size() : p) + 1);
}

bool section_known(const std::string& section) {
    return std::any_of(kSchema.begin(), kSchema.end(), [&](const KeySpec& s) { return s.section == section; });
}

}  // namespace

const std::vector<KeySpec>& schema() { return kSchema; }

void RunConfig::set(const KeySpec& spec, const std::string& raw, const std::string& source, int line,
                    int column) {
    std::istringstream tokens(raw);
    std::string value, unit, extra;
    tokens >> value >> unit >> extra;
    const auto value_pos = raw.find(value);
    const auto unit_pos = unit.empty() ? value_pos : raw.find(unit, value_pos + value.size());
    const int unit_column = column + static_cast<int>(unit_pos - raw.find_first_not_of(" \t"));
    if (value.empty()) throw ParseError(source, line, column, "missing value for '" + spec.name() + "'");
    if (!extra.empty())
        throw ParseError(source, line, column, "unexpected trailing text after the value of '" + spec.name() + "'");

    if (!unit.empty() && unit != spec.unit) {
        const std::string expected = spec.unit.empty() ? "no unit" : "'" + spec.unit + "'";
        throw ParseError(source, line, unit_column,
                         "unit '" + unit + "' does not match " + expected + " for '" + spec.name() + "'");
    }

    std::string canonical;
    switch (spec.kind) {
        case K::number:
            try {
                canonical = format_double(parse_double(value));
            } catch (const InvalidArgument&) {
                throw ParseError(source, line, column, "'" + value + "' is not a number for '" + spec.name() + "'");
            }
            break;
        case K::integer: {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size())
                throw ParseError(source, line, column,
                                 "'" + value + "' is not a non-negative integer for '" + spec.name() + "'");
            canonical = std::to_string(v);
            break;
        }
        case K::boolean:
            if (value == "true" || value == "yes" || value == "1") canonical = "true";
            else if (value == "false" || value == "no" || value == "0") canonical = "false";
            else throw ParseError(source, line, column, "'" + value + "' is not a boolean for '" + spec.name() + "'");
            break;
        case K::text:
            if (!spec.choices.empty() &&
                std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
                std::string allowed;
                for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : ", ") + c;
                throw ParseError(source, line, column,
                                 "'" + value + "' is not one of {" + allowed + "} for '" + spec.name() + "'");
            }
            canonical = value;
            break;
    }
    entries_[spec.name()] = Entry{canonical, line};
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
    RunConfig cfg;
    cfg.source_ = source;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#' || t.front() == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError(source, line_no, column_of(line, 0), "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!section_known(section))
                throw ParseError(source, line_no, column_of(line, 0), "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source, line_no, column_of(line, 0), "expected 'key = value'");
        if (section.empty())
            throw ParseError(source, line_no, column_of(line, 0), "key outside of a [section]");
        const std::string key = trim(line.substr(0, eq));
        const KeySpec* spec = find_spec(section, key);
        if (!spec) throw ParseError(source, line_no, column_of(line, 0), "unknown key '" + key + "' in [" + section + "]");
        if (const auto it = cfg.entries_.find(spec->name()); it != cfg.entries_.end()) {
            throw ParseError(source, line_no, column_of(line, 0),
                             "duplicate key '" + spec->name() + "' (first set on line " +
                                 std::to_string(it->second.line) + ", again on line " + std::to_string(line_no) + ")");
        }
        cfg.set(*spec, line.substr(eq + 1), source, line_no, column_of(line, eq + 1));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    return parse(in, path.string());
}

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ParseError("--set", 0, 0, "expected section.key=value, got '" + assignment + "'");
    const std::string name = trim(assignment.substr(0, eq));
    const auto dot = name.find('.');
    const KeySpec* spec = dot == std::string::npos ? nullptr : find_spec(name.substr(0, dot), name.substr(dot + 1));
    if (!spec) throw ParseError("--set", 0, 0, "unknown key '" + name + "'");
    set(*spec, assignment.substr(eq + 1), "--set", 0, 0);
}

std::optional<std::string> RunConfig::effective(const std::string& name) const {
    const KeySpec& spec = spec_for(name);
    if (const auto it = entries_.find(name); it != entries_.end()) return it->second.value;
    if (spec.default_value.empty()) return std::nullopt;
    if (spec.kind == K::number) return format_double(parse_double(spec.default_value));
    return spec.default_value;
}

bool RunConfig::has(const std::string& name) const { return effective(name).has_value(); }

void RunConfig::require(const std::string& name) const {
    if (!has(name)) throw ParseError(source_, 0, 0, "missing required key '" + name + "'");
}

double RunConfig::number(const std::string& name) const {
    require(name);
    return parse_double(*effective(name));
}

std::optional<double> RunConfig::optional_number(const std::string& name) const {
    const auto v = effective(name);
    if (!v) return std::nullopt;
    return parse_double(*v);
}

std::uint64_t RunConfig::integer(const std::string& name) const {
    require(name);
    return std::stoull(*effective(name));
}

std::string RunConfig::text(const std::string& name) const {
    require(name);
    return *effective(name);
}

bool RunConfig::flag(const std::string& name) const { return text(name) == "true"; }

int RunConfig::line_of(const std::string& name) const {
    const auto it = entries_.find(name);
    return it == entries_.end() ? 0 : it->second.line;
}

std::string RunConfig::emit() const {
    std::ostringstream out;
    std::string section;
    for (const auto& spec : kSchema) {
        const auto value = effective(spec.name());
        if (!value) continue;
        if (spec.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << spec.section << "]\n";
            section = spec.section;
        }
        out << spec.key << " = " << *value;
        if (!spec.unit.empty()) out << ' ' << spec.unit;
        out << '\n';
    }
    return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    for (const auto& spec : kSchema)
        if (a.effective(spec.name()) != b.effective(spec.name())) return false;
    return true;
}

}  // namespace spdc::config
