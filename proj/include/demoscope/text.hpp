#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared across modules. ASCII-only case folding; model
// replies and labels are compared in lowercase ASCII.
namespace demoscope::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
/// Lowercase and collapse every whitespace run to a single space, trimmed.
std::string normalize(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with_word(std::string_view haystack, std::string_view prefix);
std::string replace_all(std::string s, std::string_view from, std::string_view to);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
/// Round half away from zero.
long long round_half_away(double v);

}  // namespace demoscope::text
