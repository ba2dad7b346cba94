#pragma once

#include <string>
#include <string_view>

namespace valfind {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
/// Fixed-point rendering for human-facing tables.
std::string format_fixed(double v, int decimals);
/// Strict parse of a whole string as a double; throws DataError.
double parse_double(std::string_view s);
/// Strict parse of a whole string as a signed 64-bit integer; throws DataError.
long long parse_int(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace valfind
