#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace judgecal {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Locale-independent full-string parse; rejects trailing garbage.
std::optional<double> parse_number(std::string_view s);

// Shortest round-trip decimal representation ('.'-separated, no locale).
std::string format_double(double v);

// Fixed decimal places, e.g. format_fixed(-0.21, 4) == "-0.2100".
std::string format_fixed(double v, int decimals);

// Current wall-clock time as "YYYY-MM-DDTHH:MM:SS.mmmZ".
std::string iso8601_utc_now();

} // namespace judgecal
