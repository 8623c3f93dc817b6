#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace spdc::config {

enum class ValueKind { number, integer, text, boolean };

/// One accepted `section.key`. An empty `default_value` means the key is
/// optional with no default (commands that need it call `require`).
struct KeySpec {
    std::string section;
    std::string key;
    ValueKind kind = ValueKind::number;
    std::string unit;  // expected suffix; empty for dimensionless or text
    std::string default_value;
    std::vector<std::string> choices;  // text keys only

    std::string name() const { return section + "." + key; }
};

/// Every accepted key, in emission order.
const std::vector<KeySpec>& schema();

/// Parsed INI-style run configuration with sections [jsa], [state], [scan],
/// [multipair]. Values are stored in canonical text form so that emitting and
/// re-parsing gives an identical configuration.
class RunConfig {
public:
    static RunConfig parse(std::istream& in, const std::string& source = "<config>");
    static RunConfig load(const std::filesystem::path& path);

    /// Applies `section.key=value` (value may carry a unit suffix).
    void apply_override(const std::string& assignment);

    bool has(const std::string& name) const;
    /// Throws ParseError naming the key when neither set nor defaulted.
    void require(const std::string& name) const;

    double number(const std::string& name) const;
    std::optional<double> optional_number(const std::string& name) const;
    std::uint64_t integer(const std::string& name) const;
    std::string text(const std::string& name) const;
    bool flag(const std::string& name) const;

    /// Effective configuration (explicit values and defaults) as parseable text.
    std::string emit() const;

    /// Line where the key was set; 0 for defaults or command-line overrides.
    int line_of(const std::string& name) const;

    friend bool operator==(const RunConfig& a, const RunConfig& b);

private:
    struct Entry {
        std::string value;
        int line = 0;
    };

    void set(const KeySpec& spec, const std::string& raw, const std::string& source, int line,
             int column);
    std::optional<std::string> effective(const std::string& name) const;

    std::map<std::string, Entry> entries_;
    std::string source_;
};

}  // namespace spdc::config
