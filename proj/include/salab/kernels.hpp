#pragma once

#include <variant>
#include <vector>

#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab {

// Stationary laws used by the stock kernels.

struct PointMass {
  Param value;
};

/// Spherical normal N(mean, sd^2 I).
struct Normal {
  Param mean;
  double sd = 1.0;
};

struct Mixture {
  std::vector<double> weights;  // normalized on construction via make_mixture
  std::vector<Normal> components;
};

struct UniformBox {
  Param lo;
  Param hi;
};

struct UniformBall {
  std::size_t dim = 1;
  double radius = 1.0;
};

using Distribution = std::variant<PointMass, Normal, Mixture, UniformBox, UniformBall>;

Mixture make_mixture(std::vector<double> weights, std::vector<Normal> components);

std::size_t dimension(const Distribution& dist);
Param sample(const Distribution& dist, Rng& rng);

/// Density up to a constant that is shared by all points (enough for Metropolis ratios).
double density(const Distribution& dist, const Param& x);

// Kernels.

/// P_theta(x, .) = pi: a fresh independent draw.
Param iid_step(const Distribution& dist, Rng& rng);

/// x' = rho x + sigma eps with eps ~ N(0, I).
Param ar1_step(double rho, double sigma, const Param& x, Rng& rng);

/// Gaussian proposal whose straight-line path is reflected specularly off the
/// sphere of radius `radius`, followed by a Metropolis accept/reject against `target`.
/// The reflected path map is volume preserving and reversible, so the proposal is
/// symmetric and the ratio is target(y)/target(x).
Param rwm_reflected_step(const Distribution& target, double radius, double scale, const Param& x,
                         Rng& rng);

/// Moves `from` by displacement `delta`, reflecting off the sphere |p| = radius.
Param reflect_in_ball(const Param& from, const Param& delta, double radius);

struct IidKernel {
  Distribution dist;
};

struct Ar1Kernel {
  double rho = 0.0;
  double sigma = 1.0;
  std::size_t dim = 1;
};

struct RwmKernel {
  Distribution target;
  double radius = 1.0;
  double scale = 0.1;
};

using KernelSpec = std::variant<IidKernel, Ar1Kernel, RwmKernel>;

Param kernel_step(const KernelSpec& kernel, const Param& x, Rng& rng);
std::size_t dimension(const KernelSpec& kernel);

}  // namespace salab
