#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "extremo/rng.hpp"

using extremo::Philox4x32;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox bijection matches reference vectors") {
  using Block = Philox4x32::Block;
  using Key = Philox4x32::Key;

  CHECK(Philox4x32::bijection(Block{0, 0, 0, 0}, Key{0, 0}) ==
        Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::bijection(Block{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              Key{0xffffffffu, 0xffffffffu}) ==
        Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::bijection(Block{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              Key{0xa4093822u, 0x299f31d0u}) ==
        Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("engine output is the counter stream") {
  Philox4x32 eng(0);
  const auto block = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
  CHECK(eng() == ((std::uint64_t{block[1]} << 32) | block[0]));
  CHECK(eng() == ((std::uint64_t{block[3]} << 32) | block[2]));
}

TEST_CASE("engine is deterministic and streams are distinct") {
  Philox4x32 a(42), b(42), c(42, 1), d(43);
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int i = 0; i < 64; ++i) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
    xd.push_back(d());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
}

TEST_CASE("discard skips exactly z outputs") {
  for (std::uint64_t skip : {0ull, 1ull, 2ull, 3ull, 7ull, 100ull}) {
    for (int warmup : {0, 1}) {
      Philox4x32 ref(9), eng(9);
      for (int i = 0; i < warmup; ++i) {
        ref();
        eng();
      }
      for (std::uint64_t i = 0; i < skip; ++i) ref();
      eng.discard(skip);
      for (int i = 0; i < 5; ++i) CHECK(eng() == ref());
    }
  }
}

TEST_CASE("derived seeds do not collide") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ull, 1ull, 12345ull})
    for (std::uint64_t stream = 0; stream < 2000; ++stream)
      seen.insert(extremo::derive_seed(master, stream));
  CHECK(seen.size() == 6000);
  CHECK(extremo::derive_seed(7, 3) == extremo::derive_seed(7, 3));
}

TEST_CASE("uniform variates lie in the open unit interval with mean 1/2") {
  Philox4x32 eng(1);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = extremo::uniform_open01(eng);
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double se = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::abs(sum / n - 0.5) < 4 * se);
}

TEST_CASE("uniform_index is bounded and roughly uniform") {
  Philox4x32 eng(2);
  const std::uint64_t bound = 7;
  std::vector<int> counts(bound, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = extremo::uniform_index(eng, bound);
    REQUIRE(k < bound);
    ++counts[k];
  }
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  CHECK(chi2 < 22.5);  // chi-square(6) upper 0.001 point
}

TEST_CASE("unit Frechet variates have the Frechet median") {
  Philox4x32 eng(3);
  const int n = 200000;
  const double median = 1.0 / std::log(2.0);
  int below = 0;
  for (int i = 0; i < n; ++i) below += extremo::unit_frechet(eng) <= median;
  CHECK(std::abs(below / static_cast<double>(n) - 0.5) < 4 * std::sqrt(0.25 / n));
}

TEST_CASE("exponential and normal moments") {
  Philox4x32 eng(4);
  extremo::NormalSampler normal;
  const int n = 200000;
  double se = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    se += extremo::standard_exponential(eng);
    const double z = normal(eng);
    sn += z;
    sn2 += z * z;
  }
  CHECK(std::abs(se / n - 1.0) < 4 / std::sqrt(n));
  CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
}
