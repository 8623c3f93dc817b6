#pragma once

#include <string>

namespace spdc {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Parses a complete decimal token; throws InvalidArgument otherwise.
double parse_double(const std::string& text);

}  // namespace spdc
