#pragma once

#include <string_view>

namespace clara {

/// Ratcliff-Obershelp ratio 2M/T over UTF-8 code points. Anchors are the
/// leftmost-longest common substring (earliest in a, then earliest in b).
/// Two empty strings score 1.
double gestalt_similarity(std::string_view a, std::string_view b);

}  // namespace clara
