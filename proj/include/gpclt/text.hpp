#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gpclt::text {

/// Parses the whole of `token` as a decimal floating-point number; throws
/// ParseError naming `what` otherwise.
double parse_double(std::string_view token, std::string_view what);
long long parse_integer(std::string_view token, std::string_view what);

std::vector<std::string_view> split(std::string_view text, char sep);

/// Shortest representation that reads back to the same double.
std::string shortest(double value);

/// Fixed 17-significant-digit rendering used for all data output.
std::string digits17(double value);

}  // namespace gpclt::text
