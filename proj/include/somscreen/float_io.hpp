#pragma once

#include <string>
#include <string_view>

namespace somscreen {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Strict parse of a whole token; throws ParseError on junk or empty input.
double parse_double(std::string_view text, std::size_t line = 0);

long long parse_int(std::string_view text, std::size_t line = 0);

std::string_view trim(std::string_view s);

}  // namespace somscreen
