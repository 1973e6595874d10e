#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab {

/// Weighted network whose score is the length of the shortest of a fixed list
/// of source-to-sink paths, each path given as a set of edge indices.
class BridgeNetwork {
 public:
  BridgeNetwork(std::vector<double> weights, std::vector<std::vector<std::size_t>> paths);

  /// Five-edge bridge with weights (1,2,3,1,2) and paths {0,3},{1,4},{0,2,4},{1,2,3}.
  static BridgeNetwork default_bridge();

  std::size_t edges() const noexcept { return weights_.size(); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<std::vector<std::size_t>>& paths() const noexcept { return paths_; }

  /// Largest attainable score, phi(1, ..., 1).
  double max_score() const;

 private:
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> paths_;
};

/// min over paths of sum_{l in path} a_l u_l.
double phi(const BridgeNetwork& net, std::span<const double> u);

/// Lower end t* of {t in [0,1] : phi(u with u_l = t) >= theta} = [t*, 1].
/// Requires phi(u) >= theta.
double gibbs_threshold(const BridgeNetwork& net, double theta, std::span<const double> u,
                       std::size_t edge);

/// One systematic-scan Gibbs sweep targeting the uniform law on {phi >= theta}.
Param gibbs_sweep(const BridgeNetwork& net, double theta, const Param& u, Rng& rng);

/// Smallest point on the segment u -> (1,...,1) with phi >= theta (bisection).
/// theta must not exceed max_score().
Param lift_to_support(const BridgeNetwork& net, double theta, const Param& u);

}  // namespace salab
