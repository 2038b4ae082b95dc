#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tagforge {

[[nodiscard]] std::string_view trim(std::string_view s);

/// Splits on any of `separators`, trimming each piece and dropping empty ones.
[[nodiscard]] std::vector<std::string_view> split_fields(std::string_view s, std::string_view separators);

/// Shortest text that parses back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Strict full-string parses; nullopt on trailing garbage or non-finite values.
[[nodiscard]] std::optional<double> parse_double(std::string_view text);
[[nodiscard]] std::optional<long long> parse_int(std::string_view text);
[[nodiscard]] std::optional<unsigned long long> parse_u64(std::string_view text);

}  // namespace tagforge
