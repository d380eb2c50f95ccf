#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace clara::text {

std::string_view trim(std::string_view s) noexcept;
/// ASCII lower-casing; non-ASCII bytes pass through unchanged.
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;
std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Decodes UTF-8 into code points. Invalid bytes decode to themselves so that
/// no input is ever rejected.
std::u32string utf8_decode(std::string_view s);

}  // namespace clara::text
