#include "salab/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace salab {

BridgeNetwork::BridgeNetwork(std::vector<double> weights,
                             std::vector<std::vector<std::size_t>> paths)
    : weights_(std::move(weights)), paths_(std::move(paths)) {
  if (weights_.empty()) throw Error(ErrorKind::InvalidArgument, "network has no edges");
  for (double a : weights_) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "edge weights must be positive");
  }
  if (paths_.empty()) throw Error(ErrorKind::InvalidArgument, "network has no paths");
  std::vector<bool> covered(weights_.size(), false);
  for (const auto& path : paths_) {
    if (path.empty()) throw Error(ErrorKind::InvalidArgument, "empty path");
    for (std::size_t e : path) {
      if (e >= weights_.size()) {
        std::ostringstream os;
        os << "path edge index " << e << " out of range";
        throw Error(ErrorKind::InvalidArgument, os.str());
      }
      covered[e] = true;
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw Error(ErrorKind::InvalidArgument, "every edge must lie on at least one path");
  }
}

BridgeNetwork BridgeNetwork::default_bridge() {
  return BridgeNetwork({1.0, 2.0, 3.0, 1.0, 2.0}, {{0, 3}, {1, 4}, {0, 2, 4}, {1, 2, 3}});
}

double BridgeNetwork::max_score() const {
  const std::vector<double> ones(weights_.size(), 1.0);
  return phi(*this, ones);
}

double phi(const BridgeNetwork& net, std::span<const double> u) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& path : net.paths()) {
    double len = 0.0;
    for (std::size_t e : path) len += net.weights()[e] * u[e];
    best = std::min(best, len);
  }
  return best;
}

double gibbs_threshold(const BridgeNetwork& net, double theta, std::span<const double> u,
                       std::size_t edge) {
  if (phi(net, u) < theta - 1e-12 * std::max(1.0, std::abs(theta))) {
    throw Error(ErrorKind::StateOutsideSupport, "gibbs_threshold: phi(u) < theta");
  }
  // Only paths through `edge` depend on u_edge; the others already reach theta.
  double m_yes = std::numeric_limits<double>::infinity();
  for (const auto& path : net.paths()) {
    if (std::find(path.begin(), path.end(), edge) == path.end()) continue;
    double rest = 0.0;
    for (std::size_t e : path) {
      if (e != edge) rest += net.weights()[e] * u[e];
    }
    m_yes = std::min(m_yes, rest);
  }
  return std::clamp((theta - m_yes) / net.weights()[edge], 0.0, 1.0);
}

Param gibbs_sweep(const BridgeNetwork& net, double theta, const Param& u, Rng& rng) {
  if (u.size() != net.edges()) {
    throw Error(ErrorKind::DimensionMismatch, "gibbs_sweep: state size differs from edge count");
  }
  Param out = u;
  for (std::size_t e = 0; e < net.edges(); ++e) {
    const double lo = gibbs_threshold(net, theta, out.span(), e);
    // A draw landing on t* can round to phi < theta by one ulp; redraw then.
    for (int attempt = 0; attempt < 8; ++attempt) {
      out[e] = lo + (1.0 - lo) * rng.uniform_open();
      if (phi(net, out.span()) >= theta) break;
    }
  }
  return out;
}

Param lift_to_support(const BridgeNetwork& net, double theta, const Param& u) {
  if (phi(net, u.span()) >= theta) return u;
  if (theta > net.max_score()) {
    throw Error(ErrorKind::StateOutsideSupport, "lift_to_support: theta above max score");
  }
  auto at = [&](double s) {
    Param p = u;
    for (double& v : p) v += s * (1.0 - v);
    return p;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 80 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(net, at(mid).span()) >= theta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  Param p = at(hi);
  if (phi(net, p.span()) < theta) p = at(1.0);
  return p;
}

}  // namespace salab
