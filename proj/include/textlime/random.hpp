#pragma once

#include <cstdint>
#include <random>

namespace textlime {

// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// A seedable 64-bit Mersenne Twister stream. Streams are split by deriving
/// a child seed from (seed, index); children of distinct indices are
/// decorrelated through SplitMix64 mixing.
class RandomStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // Deterministic child stream for unit of work `index`.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index);
  RandomStream split(std::uint64_t index) const { return derive(seed_, index); }

  std::uint64_t seed() const { return seed_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  // Uniform on {0, ..., bound - 1}; bound > 0. Unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t bound);
  // Uniform on [0, 1) with 53 random bits.
  double unit();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace textlime
