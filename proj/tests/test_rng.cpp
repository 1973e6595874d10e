#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "salab/rng.hpp"
#include "salab/stats.hpp"
#include "support.hpp"

using namespace salab;

TEST_CASE("philox known-answer vectors") {
  constexpr auto zero = Rng::philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Rng::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  constexpr auto ones = Rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
  CHECK(ones == Rng::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  constexpr auto pi = Rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
  CHECK(pi == Rng::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("rng satisfies the standard generator concept") {
  static_assert(std::uniform_random_bit_generator<Rng>);
  Rng rng(5);
  std::uniform_int_distribution<int> die(1, 6);
  const int v = die(rng);
  CHECK(v >= 1);
  CHECK(v <= 6);
}

TEST_CASE("same seed and stream reproduce the sequence") {
  for (auto seed : test::kSeeds) {
    Rng a(seed, streams::kMain);
    Rng b(seed, streams::kMain);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("streams and seeds are distinct") {
  Rng main(7, streams::kMain);
  Rng pilot(7, streams::kPilot);
  Rng other(8, streams::kMain);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    seen.insert(main.next_u64());
    seen.insert(pilot.next_u64());
    seen.insert(other.next_u64());
  }
  CHECK(seen.size() == 3000);
}

TEST_CASE("drawing from one stream leaves another untouched") {
  Rng reference(3, streams::kMain);
  const auto expected = reference.next_u64();
  Rng diag(3, streams::kDiagnostic);
  for (int i = 0; i < 100; ++i) diag.next_u64();
  Rng main(3, streams::kMain);
  CHECK(main.next_u64() == expected);
}

TEST_CASE("uniform ranges") {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("uniform and normal pass Kolmogorov-Smirnov at 1%") {
  constexpr std::size_t n = 100000;
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    std::vector<double> u(n);
    std::vector<double> z(n);
    for (auto& v : u) v = rng.uniform();
    for (auto& v : z) v = rng.normal();
    CHECK(stats::ks_statistic(u, [](double x) { return std::clamp(x, 0.0, 1.0); }) <
          stats::ks_critical(0.01, n));
    CHECK(stats::ks_statistic(z, stats::normal_cdf) < stats::ks_critical(0.01, n));
  }
}

TEST_CASE("below is in range and roughly flat") {
  Rng rng(9);
  std::array<int, 7> counts{};
  constexpr int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}
