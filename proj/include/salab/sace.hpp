#pragma once

#include <cstdint>
#include <span>

#include "salab/bridge.hpp"
#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab {

// Product of Beta(nu_l, 1) laws on [0,1]^d as a canonical exponential family:
// S(u) = (ln u_l), B(nu) = sum ln nu_l, and the cross-entropy maximizer
// nu_hat(s)_l = -1/s_l.

Param sufficient_stat(std::span<const double> u);
double log_normalizer(std::span<const double> nu);
Param nu_hat(std::span<const double> s);

/// p(z)/g_nu(z) for uniform p on the cube.
double importance_weight(std::span<const double> z, std::span<const double> nu);

/// Componentwise inverse CDF draw U^{1/nu_l}.
Param sample_beta_product(std::span<const double> nu, Rng& rng);

/// Form of the theta increment.
///  - Lower: q - 1{phi(z) < theta} w(z), as written for the algorithm.
///  - Upper: 1{phi(z) >= theta} w(z) - (1 - q). Same mean field and root, but
///    the weights are only evaluated on the tail the instrumental law targets,
///    so the increment has bounded variance.
enum class SaceEstimator { Upper, Lower };

struct SaceOptions {
  double q = 0.99;
  SaceEstimator estimator = SaceEstimator::Upper;
  double weight_cap = 1e12;
};

/// Chain part of the composite state: Y (truncated-support MCMC state) and Z
/// (importance draw).
struct SaceChain {
  Param y;
  Param z;
};

struct SaceState {
  double theta = 0.0;
  Param sigma;
  Param y;
  Param z;
  std::uint64_t n = 0;
};

/// Composite parameter (theta, sigma_1, ..., sigma_d) used by the stabilizer.
Param pack(double theta, const Param& sigma);
double packed_theta(const Param& packed);
Param packed_sigma(const Param& packed);

/// Controlled kernel: Y' ~ Q_theta(Y, .) by one Gibbs sweep, Z' ~ g_{nu_hat(sigma)}.
/// If Y is outside {phi >= theta} (theta moved up) it is first lifted toward the
/// all-ones corner; theta is capped at the network's maximum score.
struct SaceKernel {
  const BridgeNetwork* net;
  SaceChain operator()(const Param& packed, const SaceChain& x, Rng& rng) const;
};

/// H((theta, sigma), (y, z)) = (theta increment, S(y) - sigma).
struct SaceField {
  const BridgeNetwork* net;
  SaceOptions options;
  std::uint64_t* clip_events = nullptr;
  Param operator()(const Param& packed, const SaceChain& x) const;
};

/// One iteration of the cross-entropy SA with a single step for both updates.
SaceState sace_step(const SaceState& state, const BridgeNetwork& net, const SaceOptions& options,
                    double step, Rng& rng, std::uint64_t* clip_events = nullptr);

struct SacePilot {
  double theta0;
  Param sigma0;
  Param y0;
};

/// theta0: empirical q-quantile of `pilot_draws` uniform points; sigma0: mean of
/// S over `accepted` uniform points with phi >= theta0 (rejection); y0: the last
/// of those points.
SacePilot sace_pilot(const BridgeNetwork& net, double q, Rng& rng, std::size_t pilot_draws = 1000,
                     std::size_t accepted = 100);

/// K_i = [-T g^i, T g^i] x prod_l [-S g^i, -1/(S g^i)].
class SaceFamily final : public CompactFamily {
 public:
  SaceFamily(double theta_max0, double s_max0, double growth);
  bool contains(std::uint64_t index, const Param& packed) const override;
  std::string describe() const override;

 private:
  double theta_max0_;
  double s_max0_;
  double growth_;
};

}  // namespace salab
