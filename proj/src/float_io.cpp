#include "somscreen/float_io.hpp"

#include <charconv>
#include <cmath>

#include "somscreen/errors.hpp"

namespace somscreen {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw InvalidArgument("cannot format value");
    return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::size_t line) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw ParseError(line, "not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_int(std::string_view text, std::size_t line) {
    text = trim(text);
    long long value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw ParseError(line, "not an integer: '" + std::string(text) + "'");
    return value;
}

}  // namespace somscreen
