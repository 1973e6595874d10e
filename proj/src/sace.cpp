#include "salab/sace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "salab/fields.hpp"
#include "salab/stabilizer.hpp"

namespace salab {

Param sufficient_stat(std::span<const double> u) {
  Param s(u.size());
  for (std::size_t l = 0; l < u.size(); ++l) s[l] = std::log(u[l]);
  return s;
}

double log_normalizer(std::span<const double> nu) {
  double acc = 0.0;
  for (double v : nu) acc += std::log(v);
  return acc;
}

Param nu_hat(std::span<const double> s) {
  Param nu(s.size());
  for (std::size_t l = 0; l < s.size(); ++l) {
    if (!(s[l] < 0.0)) {
      std::ostringstream os;
      os << "nu_hat: component " << l << " is " << s[l];
      throw Error(ErrorKind::NonNegativeSufficientStat, os.str());
    }
    nu[l] = -1.0 / s[l];
  }
  return nu;
}

namespace {

// log g_nu(z) for z in (0,1]^d.
double log_density_beta_product(std::span<const double> z, std::span<const double> nu) {
  double acc = 0.0;
  for (std::size_t l = 0; l < z.size(); ++l) acc += std::log(nu[l]) + (nu[l] - 1.0) * std::log(z[l]);
  return acc;
}

bool degenerate(std::span<const double> z) {
  return std::any_of(z.begin(), z.end(), [](double v) { return v <= kZeroTolerance; });
}

}  // namespace

double importance_weight(std::span<const double> z, std::span<const double> nu) {
  if (z.size() != nu.size()) {
    throw Error(ErrorKind::DimensionMismatch, "importance_weight: z and nu differ in size");
  }
  if (degenerate(z)) {
    throw Error(ErrorKind::DegenerateDraw, "importance_weight: draw on the cube boundary");
  }
  return std::exp(-log_density_beta_product(z, nu));
}

Param sample_beta_product(std::span<const double> nu, Rng& rng) {
  Param z(nu.size());
  for (std::size_t l = 0; l < nu.size(); ++l) z[l] = std::pow(rng.uniform_open(), 1.0 / nu[l]);
  return z;
}

Param pack(double theta, const Param& sigma) {
  Param out(sigma.size() + 1);
  out[0] = theta;
  std::copy(sigma.begin(), sigma.end(), out.begin() + 1);
  return out;
}

double packed_theta(const Param& packed) { return packed[0]; }

Param packed_sigma(const Param& packed) {
  return Param(std::vector<double>(packed.begin() + 1, packed.end()));
}

SaceChain SaceKernel::operator()(const Param& packed, const SaceChain& x, Rng& rng) const {
  const double theta = std::min(packed_theta(packed), net->max_score());
  const Param start = lift_to_support(*net, theta, x.y);
  SaceChain next;
  next.y = gibbs_sweep(*net, theta, start, rng);
  const auto sigma = packed.span().subspan(1);
  next.z = sample_beta_product(nu_hat(sigma).span(), rng);
  return next;
}

Param SaceField::operator()(const Param& packed, const SaceChain& x) const {
  const double theta = packed_theta(packed);
  const auto sigma = packed.span().subspan(1);
  const Param nu = nu_hat(sigma);

  double weight = options.weight_cap;
  bool clipped = true;
  if (!degenerate(x.z.span())) {
    const double log_w = -log_density_beta_product(x.z.span(), nu.span());
    if (log_w < std::log(options.weight_cap)) {
      weight = std::exp(log_w);
      clipped = false;
    }
  }

  const double score = phi(*net, x.z.span());
  double h_theta = 0.0;
  bool weight_used = false;
  if (options.estimator == SaceEstimator::Lower) {
    weight_used = score < theta;
    h_theta = options.q - (weight_used ? weight : 0.0);
  } else {
    weight_used = score >= theta;
    h_theta = (weight_used ? weight : 0.0) - (1.0 - options.q);
  }
  if (clipped && weight_used && clip_events != nullptr) ++*clip_events;

  Param h(packed.size());
  h[0] = h_theta;
  for (std::size_t l = 0; l < sigma.size(); ++l) h[l + 1] = std::log(x.y[l]) - sigma[l];
  return h;
}

SaceState sace_step(const SaceState& state, const BridgeNetwork& net, const SaceOptions& options,
                    double step, Rng& rng, std::uint64_t* clip_events) {
  const SaceKernel kernel{&net};
  const SaceField field{&net, options, clip_events};
  auto next = sa_step(pack(state.theta, state.sigma), SaceChain{state.y, state.z}, kernel, field,
                      step, rng);
  SaceState out;
  out.theta = packed_theta(next.theta);
  out.sigma = packed_sigma(next.theta);
  out.y = std::move(next.x.y);
  out.z = std::move(next.x.z);
  out.n = state.n + 1;
  return out;
}

SacePilot sace_pilot(const BridgeNetwork& net, double q, Rng& rng, std::size_t pilot_draws,
                     std::size_t accepted) {
  if (pilot_draws == 0 || accepted == 0) {
    throw Error(ErrorKind::InvalidArgument, "sace_pilot: pilot sizes must be positive");
  }
  const std::size_t d = net.edges();
  std::vector<double> scores(pilot_draws);
  Param u(d);
  for (double& s : scores) {
    for (double& v : u) v = rng.uniform_open();
    s = phi(net, u.span());
  }
  std::sort(scores.begin(), scores.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(pilot_draws)));
  const double theta0 = scores[std::clamp<std::size_t>(rank, 1, pilot_draws) - 1];

  SacePilot pilot{theta0, Param(d), Param(d)};
  std::size_t kept = 0;
  while (kept < accepted) {
    for (double& v : u) v = rng.uniform_open();
    if (phi(net, u.span()) >= theta0) {
      pilot.sigma0 += sufficient_stat(u.span());
      pilot.y0 = u;
      ++kept;
    }
  }
  pilot.sigma0 *= 1.0 / static_cast<double>(accepted);
  return pilot;
}

SaceFamily::SaceFamily(double theta_max0, double s_max0, double growth)
    : theta_max0_(theta_max0), s_max0_(s_max0), growth_(growth) {
  if (!(theta_max0 > 0.0) || !(s_max0 > 1.0) || !(growth > 1.0)) {
    throw Error(ErrorKind::InvalidArgument,
                "SACE family needs theta_max0 > 0, s_max0 > 1 and growth > 1");
  }
}

bool SaceFamily::contains(std::uint64_t index, const Param& packed) const {
  const double g = std::pow(growth_, static_cast<double>(index));
  if (!(std::abs(packed[0]) <= theta_max0_ * g)) return false;
  const double s_max = s_max0_ * g;
  for (std::size_t l = 1; l < packed.size(); ++l) {
    if (!(packed[l] >= -s_max && packed[l] <= -1.0 / s_max)) return false;
  }
  return true;
}

std::string SaceFamily::describe() const {
  std::ostringstream os;
  os << "sace(theta_max0=" << theta_max0_ << ", s_max0=" << s_max0_ << ", growth=" << growth_
     << ")";
  return os.str();
}

}  // namespace salab
