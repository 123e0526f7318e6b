#include "extremo/rng.hpp"

#include <cmath>
#include <numbers>

namespace extremo {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = std::uint64_t{a} * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

inline std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed),
           static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

Philox4x32::Block Philox4x32::bijection(Block ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

void Philox4x32::refill() noexcept {
  const Block counter{static_cast<std::uint32_t>(block_),
                      static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(stream_),
                      static_cast<std::uint32_t>(stream_ >> 32)};
  buffer_ = bijection(counter, key_);
  ++block_;
  used_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() noexcept {
  if (used_ >= 4) refill();
  const std::uint64_t lo = buffer_[used_];
  const std::uint64_t hi = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

void Philox4x32::discard(std::uint64_t z) noexcept {
  // Two outputs per block.
  const std::uint64_t in_buffer = static_cast<std::uint64_t>(4 - used_) / 2;
  if (z <= in_buffer) {
    used_ += static_cast<int>(2 * z);
    return;
  }
  z -= in_buffer;
  block_ += z / 2;
  used_ = 4;
  if (z % 2 != 0) {
    refill();
    used_ = 2;
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  const std::uint64_t a = splitmix_finalize(master + 0x9E3779B97F4A7C15ull);
  return splitmix_finalize(a ^ splitmix_finalize(stream * 0xD1B54A32D192ED03ull +
                                                 0x632BE59BD9B4E019ull));
}

double uniform_open01(Philox4x32& eng) noexcept {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t uniform_index(Philox4x32& eng, std::uint64_t bound) noexcept {
  unsigned __int128 product = static_cast<unsigned __int128>(eng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(eng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double standard_exponential(Philox4x32& eng) noexcept {
  return -std::log(uniform_open01(eng));
}

double unit_frechet(Philox4x32& eng) noexcept {
  return 1.0 / standard_exponential(eng);
}

double NormalSampler::operator()(Philox4x32& eng) noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_open01(eng)));
  const double angle = 2.0 * std::numbers::pi * uniform_open01(eng);
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace extremo
