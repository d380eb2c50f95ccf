#include "clara/gestalt.hpp"

#include <vector>

#include "clara/text.hpp"

namespace clara {
namespace {

struct Block {
  std::size_t i = 0, j = 0, size = 0;
};

// Longest common substring of a[alo,ahi) and b[blo,bhi). Scanning by end
// position with strict improvement keeps the earliest start in a, then in b.
Block longest_match(const std::u32string& a, std::size_t alo, std::size_t ahi,
                    const std::u32string& b, std::size_t blo, std::size_t bhi,
                    std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  Block best{alo, blo, 0};
  std::fill(prev.begin() + static_cast<long>(blo), prev.begin() + static_cast<long>(bhi) + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    cur[blo] = 0;
    for (std::size_t j = blo; j < bhi; ++j) {
      const std::size_t len = a[i] == b[j] ? prev[j] + 1 : 0;
      cur[j + 1] = len;
      if (len > best.size) best = {i + 1 - len, j + 1 - len, len};
    }
    std::swap(prev, cur);
  }
  return best;
}

std::size_t matched(const std::u32string& a, std::size_t alo, std::size_t ahi,
                    const std::u32string& b, std::size_t blo, std::size_t bhi,
                    std::vector<std::size_t>& prev, std::vector<std::size_t>& cur) {
  if (alo >= ahi || blo >= bhi) return 0;
  const Block m = longest_match(a, alo, ahi, b, blo, bhi, prev, cur);
  if (m.size == 0) return 0;
  return m.size + matched(a, alo, m.i, b, blo, m.j, prev, cur) +
         matched(a, m.i + m.size, ahi, b, m.j + m.size, bhi, prev, cur);
}

}  // namespace

double gestalt_similarity(std::string_view a, std::string_view b) {
  const std::u32string ua = text::utf8_decode(a);
  const std::u32string ub = text::utf8_decode(b);
  const std::size_t total = ua.size() + ub.size();
  if (total == 0) return 1.0;
  std::vector<std::size_t> prev(ub.size() + 1), cur(ub.size() + 1);
  const std::size_t m = matched(ua, 0, ua.size(), ub, 0, ub.size(), prev, cur);
  return 2.0 * static_cast<double>(m) / static_cast<double>(total);
}

}  // namespace clara
