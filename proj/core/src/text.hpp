#pragma once

// Small string helpers shared by the parsers. Not installed.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace occtune::text {

std::string_view trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> lines(std::string_view s);

std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

}  // namespace occtune::text
