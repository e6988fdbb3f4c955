#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "s3/common/hash.hpp"

namespace s3 {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent seed for a named stream from the run seed.
constexpr std::uint64_t stream_seed(std::uint64_t root, std::string_view stream) noexcept {
  return splitmix64(root ^ fnv1a64(stream));
}

/// Derive a per-item seed (draw index, attempt, ...) from a stream seed.
constexpr std::uint64_t item_seed(std::uint64_t stream, std::uint64_t index) noexcept {
  return splitmix64(stream ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// mt19937_64 wrapper whose draws are bit-identical across standard libraries
/// (std::uniform_*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Index drawn proportionally to non-negative weights (sum must be positive).
  std::size_t weighted(const std::vector<double>& weights);

  /// k distinct indices out of [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace s3
