#include "salab/kernels.hpp"

#include <cmath>
#include <numeric>

namespace salab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

Param sample_normal(const Normal& n, Rng& rng) {
  Param out(n.mean.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = n.mean[k] + n.sd * rng.normal();
  return out;
}

double normal_density(const Normal& n, const Param& x) {
  const double sq = squared_distance(n.mean.span(), x.span());
  const double d = static_cast<double>(x.size());
  return std::exp(-0.5 * sq / (n.sd * n.sd)) / std::pow(n.sd, d);
}

}  // namespace

Mixture make_mixture(std::vector<double> weights, std::vector<Normal> components) {
  if (weights.size() != components.size() || weights.empty()) {
    throw Error(ErrorKind::InvalidArgument, "mixture weights and components must match");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double w : weights) {
    if (!(w >= 0.0) || !(total > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "mixture weights must be nonnegative");
    }
  }
  for (double& w : weights) w /= total;
  for (const auto& c : components) {
    if (c.mean.size() != components.front().mean.size()) {
      throw Error(ErrorKind::DimensionMismatch, "mixture components differ in dimension");
    }
  }
  return Mixture{std::move(weights), std::move(components)};
}

std::size_t dimension(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const PointMass& d) { return d.value.size(); },
                        [](const Normal& d) { return d.mean.size(); },
                        [](const Mixture& d) { return d.components.front().mean.size(); },
                        [](const UniformBox& d) { return d.lo.size(); },
                        [](const UniformBall& d) { return d.dim; },
                    },
                    dist);
}

Param sample(const Distribution& dist, Rng& rng) {
  return std::visit(
      Overloaded{
          [](const PointMass& d) { return d.value; },
          [&](const Normal& d) { return sample_normal(d, rng); },
          [&](const Mixture& d) {
            const double u = rng.uniform();
            double acc = 0.0;
            std::size_t pick = d.weights.size() - 1;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              acc += d.weights[i];
              if (u < acc) {
                pick = i;
                break;
              }
            }
            return sample_normal(d.components[pick], rng);
          },
          [&](const UniformBox& d) {
            Param out(d.lo.size());
            for (std::size_t k = 0; k < out.size(); ++k) out[k] = rng.uniform(d.lo[k], d.hi[k]);
            return out;
          },
          [&](const UniformBall& d) {
            // Direction from normals, radius by inverse CDF r = R u^{1/d}.
            Param out(d.dim);
            double sq = 0.0;
            do {
              sq = 0.0;
              for (double& v : out) {
                v = rng.normal();
                sq += v * v;
              }
            } while (sq == 0.0);
            const double r =
                d.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d.dim)) / std::sqrt(sq);
            out *= r;
            return out;
          },
      },
      dist);
}

double density(const Distribution& dist, const Param& x) {
  return std::visit(
      Overloaded{
          [&](const PointMass& d) { return d.value == x ? 1.0 : 0.0; },
          [&](const Normal& d) { return normal_density(d, x); },
          [&](const Mixture& d) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d.weights.size(); ++i) {
              acc += d.weights[i] * normal_density(d.components[i], x);
            }
            return acc;
          },
          [&](const UniformBox& d) {
            for (std::size_t k = 0; k < x.size(); ++k) {
              if (x[k] < d.lo[k] || x[k] > d.hi[k]) return 0.0;
            }
            return 1.0;
          },
          [&](const UniformBall& d) { return dot(x, x) <= d.radius * d.radius ? 1.0 : 0.0; },
      },
      dist);
}

Param iid_step(const Distribution& dist, Rng& rng) { return sample(dist, rng); }

Param ar1_step(double rho, double sigma, const Param& x, Rng& rng) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "AR(1) coefficient must satisfy |rho| < 1");
  }
  Param out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = rho * x[k] + sigma * rng.normal();
  return out;
}

Param reflect_in_ball(const Param& from, const Param& delta, double radius) {
  double remaining = norm(delta);
  if (remaining == 0.0) return from;
  Param pos = from;
  Param dir = (1.0 / remaining) * delta;
  const double r2 = radius * radius;
  for (int bounce = 0; bounce < 10'000; ++bounce) {
    // Positive root of |pos + t dir|^2 = radius^2.
    const double b = dot(pos, dir);
    const double c = dot(pos, pos) - r2;
    const double disc = std::max(b * b - c, 0.0);
    const double t_hit = -b + std::sqrt(disc);
    if (t_hit >= remaining) {
      for (std::size_t k = 0; k < pos.size(); ++k) pos[k] += remaining * dir[k];
      return pos;
    }
    for (std::size_t k = 0; k < pos.size(); ++k) pos[k] += t_hit * dir[k];
    // Project onto the sphere to stop rounding drift, then reflect the direction.
    const double len = norm(pos);
    pos *= radius / len;
    const double dn = dot(dir, pos) / radius;
    for (std::size_t k = 0; k < pos.size(); ++k) dir[k] -= 2.0 * dn * pos[k] / radius;
    remaining -= t_hit;
  }
  return pos;
}

Param rwm_reflected_step(const Distribution& target, double radius, double scale, const Param& x,
                         Rng& rng) {
  Param delta(x.size());
  for (double& v : delta) v = scale * rng.normal();
  Param proposal = reflect_in_ball(x, delta, radius);
  const double px = density(target, x);
  const double py = density(target, proposal);
  const double u = rng.uniform();
  if (px <= 0.0 || u * px < py) return proposal;
  return x;
}

Param kernel_step(const KernelSpec& kernel, const Param& x, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const IidKernel& k) { return iid_step(k.dist, rng); },
                        [&](const Ar1Kernel& k) { return ar1_step(k.rho, k.sigma, x, rng); },
                        [&](const RwmKernel& k) {
                          return rwm_reflected_step(k.target, k.radius, k.scale, x, rng);
                        },
                    },
                    kernel);
}

std::size_t dimension(const KernelSpec& kernel) {
  return std::visit(Overloaded{
                        [](const IidKernel& k) { return dimension(k.dist); },
                        [](const Ar1Kernel& k) { return k.dim; },
                        [](const RwmKernel& k) { return dimension(k.target); },
                    },
                    kernel);
}

}  // namespace salab
