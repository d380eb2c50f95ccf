#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace clara {

/// 64-bit FNV-1a; stable across platforms and standard libraries.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a base seed and a key. Used to make
/// every per-session / per-epoch random draw independent of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept;

/// xoshiro256** with helpers whose output does not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() noexcept;
  /// Uniform in [0, n); n must be positive.
  std::size_t index(std::size_t n) noexcept;
  /// Draws an index with probability proportional to weights[i].
  std::size_t categorical(std::span<const double> weights) noexcept;

  template <typename T>
  void shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace clara
