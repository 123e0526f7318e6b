#pragma once

#include <array>
#include <cstdint>

namespace extremo {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit seed is the Philox key; the 128-bit counter is split into a
/// 64-bit block index and a 64-bit stream id, so independent streams can be
/// addressed without any shared state. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Skips `z` outputs of operator().
  void discard(std::uint64_t z) noexcept;

  /// The raw 10-round bijection; exposed for known-answer tests.
  static Block bijection(Block counter, Key key) noexcept;

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t block_ = 0;
  std::uint64_t stream_;
  Block buffer_{};
  int used_ = 4;  // 32-bit words consumed from buffer_, in pairs
};

/// Seed for replicate `stream` of an experiment run with `master`.
///
/// Pure function: the mapping does not depend on how replicates are scheduled.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Uniform on the open interval (0, 1) with 53 random bits.
double uniform_open01(Philox4x32& eng) noexcept;

/// Uniform integer in [0, bound); unbiased (Lemire's multiply-and-reject).
std::uint64_t uniform_index(Philox4x32& eng, std::uint64_t bound) noexcept;

double standard_exponential(Philox4x32& eng) noexcept;

/// Standard unit Frechet, P(Z <= z) = exp(-1/z).
double unit_frechet(Philox4x32& eng) noexcept;

/// Box-Muller normal sampler; keeps the second variate of each pair.
class NormalSampler {
 public:
  double operator()(Philox4x32& eng) noexcept;

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace extremo
