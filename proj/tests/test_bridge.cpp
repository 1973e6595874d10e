#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "salab/bridge.hpp"
#include "salab/oracles.hpp"
#include "salab/stats.hpp"
#include "support.hpp"

using namespace salab;
using doctest::Approx;

namespace {

const BridgeNetwork kBridge = BridgeNetwork::default_bridge();

Param uniform_cube(Rng& rng, std::size_t d) { return test::uniform_param(rng, d, 0.0, 1.0); }

BridgeNetwork random_network(Rng& rng) {
  const std::size_t d = 2 + rng.below(5);
  std::vector<double> w(d);
  for (auto& a : w) a = rng.uniform(0.2, 3.0);
  std::vector<std::vector<std::size_t>> paths;
  const std::size_t count = 1 + rng.below(5);
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<std::size_t> path;
    for (std::size_t e = 0; e < d; ++e) {
      if (rng.uniform() < 0.5) path.push_back(e);
    }
    if (path.empty()) path.push_back(rng.below(d));
    paths.push_back(path);
  }
  // Cover stray edges with one extra path.
  std::vector<std::size_t> extra;
  for (std::size_t e = 0; e < d; ++e) {
    bool used = false;
    for (const auto& p : paths) used = used || std::find(p.begin(), p.end(), e) != p.end();
    if (!used) extra.push_back(e);
  }
  if (!extra.empty()) paths.push_back(extra);
  return BridgeNetwork(w, paths);
}

// Rejection oracle: uniform draws kept when phi >= theta.
std::vector<double> rejection_scores(double theta, std::size_t n, Rng& rng) {
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const Param u = uniform_cube(rng, 5);
    const double s = phi(kBridge, u.span());
    if (s >= theta) out.push_back(s);
  }
  return out;
}

std::vector<double> gibbs_scores(double theta, std::size_t n, int thin, Rng& rng) {
  Param u(5, 1.0);
  for (int i = 0; i < 1000; ++i) u = gibbs_sweep(kBridge, theta, u, rng);
  std::vector<double> out(n);
  for (auto& s : out) {
    for (int t = 0; t < thin; ++t) u = gibbs_sweep(kBridge, theta, u, rng);
    s = phi(kBridge, u.span());
  }
  return out;
}

double uniform_quantile_of_phi(double q) {
  return oracles::mc_quantile([](Rng& r) { return uniform_cube(r, 5); },
                              [](const Param& u) { return phi(kBridge, u.span()); }, q, 1'000'000, 99);
}

}  // namespace

TEST_CASE("network validation") {
  CHECK_THROWS_AS(BridgeNetwork({1.0, -1.0}, {{0, 1}}), Error);
  CHECK_THROWS_AS(BridgeNetwork({1.0, 1.0}, {{0, 2}}), Error);
  CHECK_THROWS_AS(BridgeNetwork({1.0, 1.0}, {{0}}), Error);
  CHECK_THROWS_AS(BridgeNetwork({1.0}, {{}}), Error);
  CHECK(kBridge.edges() == 5);
  CHECK(kBridge.max_score() == 2.0);
}

TEST_CASE("phi examples") {
  CHECK(phi(kBridge, Param(5, 0.0).span()) == 0.0);
  CHECK(phi(kBridge, Param(5, 1.0).span()) == 2.0);
  CHECK(phi(kBridge, Param{0.0, 1.0, 1.0, 1.0, 1.0}.span()) == 1.0);
}

TEST_CASE("phi is coordinatewise monotone") {
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    for (int i = 0; i < 2000; ++i) {
      const BridgeNetwork net = i % 2 == 0 ? kBridge : random_network(rng);
      const Param u = uniform_cube(rng, net.edges());
      Param v = u;
      for (auto& c : v) c += rng.uniform() * (1.0 - c);
      REQUIRE(phi(net, u.span()) <= phi(net, v.span()));
    }
  }
}

TEST_CASE("gibbs_threshold examples") {
  const Param ones(5, 1.0);
  CHECK(gibbs_threshold(kBridge, 0.0, ones.span(), 3) == 0.0);
  CHECK(gibbs_threshold(kBridge, -2.0, Param(5, 0.0).span(), 1) == 0.0);
  CHECK(gibbs_threshold(kBridge, 1.5, ones.span(), 0) == Approx(0.5));
  CHECK(gibbs_threshold(kBridge, 1.5, ones.span(), 2) == 0.0);
  try {
    gibbs_threshold(kBridge, 1.5, Param(5, 0.1).span(), 0);
    FAIL("expected StateOutsideSupport");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StateOutsideSupport);
  }
}

TEST_CASE("conditional support is exactly [t*, 1]") {
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    for (int i = 0; i < 5000; ++i) {
      const BridgeNetwork net = i % 3 == 0 ? kBridge : random_network(rng);
      const Param u = uniform_cube(rng, net.edges());
      const double theta = rng.uniform() * phi(net, u.span());
      const std::size_t edge = rng.below(net.edges());
      const double t = gibbs_threshold(net, theta, u.span(), edge);
      Param probe = u;
      if (t > 0.0) {
        probe[edge] = t - 1e-6;
        REQUIRE(phi(net, probe.span()) < theta);
      }
      probe[edge] = t + 1e-6;
      REQUIRE(phi(net, probe.span()) >= theta - 1e-9);
      probe[edge] = 1.0;
      REQUIRE(phi(net, probe.span()) >= theta - 1e-9);
    }
  }
}

TEST_CASE("gibbs sweep with an inactive constraint draws independent uniforms") {
  Rng rng(4);
  Rng peek = rng;
  const Param out = gibbs_sweep(kBridge, 0.0, Param(5, 0.3), rng);
  for (std::size_t e = 0; e < 5; ++e) CHECK(out[e] == peek.uniform_open());
}

TEST_CASE("gibbs sweep keeps the support") {
  for (auto seed : test::kSeeds) {
    Rng rng(seed);
    for (int i = 0; i < 5000; ++i) {
      const BridgeNetwork net = i % 2 == 0 ? kBridge : random_network(rng);
      const Param u = uniform_cube(rng, net.edges());
      const double theta = rng.uniform() * phi(net, u.span());
      REQUIRE(phi(net, gibbs_sweep(net, theta, u, rng).span()) >= theta);
    }
  }
  Rng rng(1);
  CHECK_THROWS_AS(gibbs_sweep(kBridge, 1.0, Param(5, 0.0), rng), Error);
}

TEST_CASE("lift_to_support reaches the support along the diagonal") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Param u = uniform_cube(rng, 5);
    const double theta = rng.uniform(0.0, 2.0);
    const Param p = lift_to_support(kBridge, theta, u);
    REQUIRE(phi(kBridge, p.span()) >= theta);
    for (std::size_t e = 0; e < 5; ++e) REQUIRE(p[e] >= u[e]);
  }
  CHECK_THROWS_AS(lift_to_support(kBridge, 2.5, Param(5, 0.0)), Error);
}

TEST_CASE("gibbs stationarity against the rejection oracle") {
  constexpr std::size_t n = 100000;
  const double theta = uniform_quantile_of_phi(0.9);
  for (auto seed : test::kSeeds) {
    Rng chain(seed, streams::kMain);
    Rng oracle(seed, streams::kOracle);
    const auto g = gibbs_scores(theta, n, 5, chain);
    const auto r = rejection_scores(theta, n, oracle);
    CHECK(stats::ks_two_sample(g, r) < stats::ks_two_sample_critical(0.01, n, n));
  }
}

TEST_CASE("gibbs stationarity in the thin slab near the maximum") {
  constexpr std::size_t n = 20000;
  const double theta = uniform_quantile_of_phi(0.995);
  Rng chain(3, streams::kMain);
  Rng oracle(3, streams::kOracle);
  const auto g = gibbs_scores(theta, n, 10, chain);
  const auto r = rejection_scores(theta, n, oracle);
  CHECK(stats::ks_two_sample(g, r) < stats::ks_two_sample_critical(0.01, n, n));
}
