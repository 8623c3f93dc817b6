#include "spdc/format.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "spdc/errors.hpp"

namespace spdc {

std::string format_double(double value) {
    if (value == 0.0) return "0";  // also folds -0
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw InvalidArgument("format_double: value cannot be formatted");
    return std::string(buf.data(), end);
}

double parse_double(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || first == last)
        throw InvalidArgument("not a number: '" + text + "'");
    return value;
}

}  // namespace spdc
