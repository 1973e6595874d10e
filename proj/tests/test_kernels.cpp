#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salab/kernels.hpp"
#include "salab/stats.hpp"
#include "support.hpp"

using namespace salab;
using doctest::Approx;

TEST_CASE("iid kernel examples") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(iid_step(PointMass{Param{2.5, -1.0}}, rng) == Param{2.5, -1.0});

  constexpr std::size_t n = 100000;
  for (auto seed : test::kSeeds) {
    Rng r(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = iid_step(Normal{Param{0.0}, 1.0}, r)[0];
    CHECK(stats::ks_statistic(x, stats::normal_cdf) < stats::ks_critical(0.01, n));
    CHECK(std::abs(stats::autocorrelation(x, 1)) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("distributions: sampling and dimension") {
  Rng rng(2);
  const Distribution mix = make_mixture({3.0, 1.0}, {Normal{{-2.0, 0.0}, 1.0}, Normal{{2.0, 0.0}, 0.5}});
  CHECK(std::get<Mixture>(mix).weights[0] == Approx(0.75));
  CHECK(dimension(mix) == 2);
  CHECK(dimension(UniformBall{3, 2.0}) == 3);
  CHECK(dimension(UniformBox{Param{0.0, 0.0}, Param{1.0, 2.0}}) == 2);

  constexpr std::size_t n = 200000;
  double left = 0.0;
  for (std::size_t i = 0; i < n; ++i) left += sample(mix, rng)[0] < 0.0 ? 1.0 : 0.0;
  CHECK(left / n == Approx(0.75 * stats::normal_cdf(2.0) + 0.25 * stats::normal_cdf(-4.0)).epsilon(0.01));

  for (auto seed : test::kSeeds) {
    Rng box_rng(seed);
    std::vector<double> u(n);
    for (auto& v : u) v = sample(UniformBox{Param{-1.0}, Param{3.0}}, box_rng)[0];
    CHECK(stats::ks_statistic(u, [](double x) { return std::clamp((x + 1.0) / 4.0, 0.0, 1.0); }) <
          stats::ks_critical(0.01, n));
  }

  std::vector<double> radii(n);
  for (auto& v : radii) {
    const Param p = sample(UniformBall{3, 2.0}, rng);
    REQUIRE(norm(p) <= 2.0);
    v = norm(p);
  }
  CHECK(stats::ks_statistic(radii, [](double r) { return std::pow(std::clamp(r / 2.0, 0.0, 1.0), 3.0); }) <
        stats::ks_critical(0.01, n));
}

TEST_CASE("ar1 examples") {
  Rng rng(3);
  CHECK(ar1_step(0.5, 0.0, Param{2.0, -4.0}, rng) == Param{1.0, -2.0});
  CHECK_THROWS_AS(ar1_step(1.0, 1.0, Param{0.0}, rng), Error);

  constexpr std::size_t n = 100000;
  for (auto seed : test::kSeeds) {
    Rng a(seed);
    Rng b(seed);
    std::vector<double> x(n);
    Param state{5.0};
    for (auto& v : x) {
      state = ar1_step(0.0, 2.0, state, a);
      v = state[0];
    }
    CHECK(stats::ks_statistic(x, [](double t) { return stats::normal_cdf(t / 2.0); }) <
          stats::ks_critical(0.01, n));
    // rho = 0 consumes the same stream as an i.i.d. N(0, sigma^2) refresh.
    CHECK(ar1_step(0.0, 2.0, Param{9.0}, b)[0] == Approx(2.0 * Rng(seed).normal()));
  }
}

TEST_CASE("ar1 stationary variance") {
  constexpr std::size_t n = 1'000'000;
  constexpr double rho = 0.5;
  const double var = 1.0 / (1.0 - rho * rho);
  // Var of the sample variance of a Gaussian AR(1): 2 var^2 (1 + rho^2) / ((1 - rho^2) n).
  const double se = std::sqrt(2.0 * var * var * (1.0 + rho * rho) / ((1.0 - rho * rho) * n));
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    Param x{0.0};
    for (int i = 0; i < 1000; ++i) x = ar1_step(rho, 1.0, x, rng);
    std::vector<double> path(n);
    for (auto& v : path) {
      x = ar1_step(rho, 1.0, x, rng);
      v = x[0];
    }
    CHECK(std::abs(stats::variance(path) - 4.0 / 3.0) < 3.0 * se);
  }
}

TEST_CASE("reflection stays in the ball and preserves path length") {
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    for (int i = 0; i < 10000; ++i) {
      const Param from = sample(UniformBall{2, 1.0}, rng);
      Param delta{rng.normal() * 3.0, rng.normal() * 3.0};
      const Param to = reflect_in_ball(from, delta, 1.0);
      REQUIRE(norm(to) <= 1.0 + 1e-12);
      if (norm(from + delta) <= 1.0) REQUIRE(norm(to - (from + delta)) < 1e-12);
    }
  }
  // Radial bounce in 1-D: 0.5 + 1.0 hits 1 and comes back 0.5.
  CHECK(reflect_in_ball(Param{0.5}, Param{1.0}, 1.0)[0] == Approx(0.5));
}

TEST_CASE("rwm with uniform target accepts interior proposals") {
  const Distribution target = UniformBall{2, 1.0};
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Param x = sample(target, rng);
    Rng peek = rng;
    const Param delta{0.1 * peek.normal(), 0.1 * peek.normal()};
    const Param y = rwm_reflected_step(target, 1.0, 0.1, x, rng);
    if (norm(x + delta) <= 1.0) REQUIRE(norm(y - (x + delta)) < 1e-12);
  }
}

TEST_CASE("rwm rejection keeps the state") {
  // Sharp normal target: proposals far from the mode are almost always rejected.
  const Distribution target = Normal{Param{0.0}, 0.01};
  Rng rng(5);
  const Param x{0.0};
  int stayed = 0;
  for (int i = 0; i < 200; ++i) {
    const Param y = rwm_reflected_step(target, 10.0, 1.0, x, rng);
    if (y == x) ++stayed;
  }
  CHECK(stayed > 150);
}

TEST_CASE("rwm preserves the uniform ball law") {
  constexpr std::size_t n = 100000;
  constexpr int thin = 10;
  const Distribution target = UniformBall{2, 1.0};
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    Rng direct(seed, streams::kDiagnostic);
    Param x{0.0, 0.0};
    for (int i = 0; i < 1000; ++i) x = rwm_reflected_step(target, 1.0, 0.5, x, rng);
    std::vector<double> chain(n);
    std::vector<double> iid(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (int t = 0; t < thin; ++t) {
        x = rwm_reflected_step(target, 1.0, 0.5, x, rng);
        REQUIRE(norm(x) <= 1.0 + 1e-12);
      }
      chain[k] = norm(x);
      iid[k] = norm(sample(target, direct));
    }
    CHECK(stats::ks_two_sample(chain, iid) < stats::ks_two_sample_critical(0.01, n, n));
  }
}

TEST_CASE("rwm preserves a non-uniform target") {
  constexpr std::size_t n = 50000;
  constexpr int thin = 20;
  const Distribution target = Normal{Param{0.3}, 0.4};
  Rng rng(6);
  Param x{0.0};
  std::vector<double> chain(n);
  for (auto& v : chain) {
    for (int t = 0; t < thin; ++t) x = rwm_reflected_step(target, 2.0, 0.8, x, rng);
    v = x[0];
  }
  // Target truncated to [-2, 2].
  const double lo = stats::normal_cdf((-2.0 - 0.3) / 0.4);
  const double hi = stats::normal_cdf((2.0 - 0.3) / 0.4);
  CHECK(stats::ks_statistic(chain, [&](double t) {
          return (stats::normal_cdf((std::clamp(t, -2.0, 2.0) - 0.3) / 0.4) - lo) / (hi - lo);
        }) < stats::ks_critical(0.01, n));
}

TEST_CASE("kernels are deterministic given the stream") {
  const KernelSpec specs[] = {IidKernel{Normal{Param{0.0, 0.0}, 1.0}}, Ar1Kernel{0.5, 1.0, 2},
                              RwmKernel{UniformBall{2, 1.0}, 1.0, 0.3}};
  for (const auto& spec : specs) {
    Rng a(8);
    Rng b(8);
    Param xa{0.0, 0.0};
    Param xb{0.0, 0.0};
    for (int i = 0; i < 100; ++i) {
      xa = kernel_step(spec, xa, a);
      xb = kernel_step(spec, xb, b);
      REQUIRE(xa == xb);
    }
    CHECK(dimension(spec) == 2);
  }
}
