#include "salab/fields.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace salab {

QuantileSpec::QuantileSpec(double level, Score score) : q(level), phi(std::move(score)) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "quantile level must lie in (0, 1)");
  }
  if (!phi) {
    throw Error(ErrorKind::InvalidArgument, "quantile score function is empty");
  }
}

double quantile_field(const QuantileSpec& spec, double theta, const Param& x) {
  return spec.q - (spec.phi(x) <= theta ? 1.0 : 0.0);
}

double quantile_lyap_deriv(double q, double theta, std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptySamples, "quantile_lyap_deriv");
  std::size_t below = 0;
  for (double s : scores) below += s <= theta ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(scores.size()) - q;
}

double quantile_lyap(double q, double theta, std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::EmptySamples, "quantile_lyap");
  double acc = 0.0;
  for (double s : scores) acc += std::abs(theta - s);
  return 0.5 * acc / static_cast<double>(scores.size()) + (0.5 - q) * theta;
}

Param median_field(const Param& theta, const Param& x) {
  require_same_dim(theta, x, "median_field");
  Param diff = x - theta;
  const double len = norm(diff);
  if (len <= kZeroTolerance) return Param(theta.size());
  diff *= 1.0 / len;
  return diff;
}

double median_lyap(const Param& theta, std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "median_lyap");
  double acc = 0.0;
  for (const auto& x : samples) acc += std::sqrt(squared_distance(x.span(), theta.span()));
  return acc / static_cast<double>(samples.size());
}

Dictionary::Dictionary(std::size_t count, std::size_t dim, Param points, double delta,
                       double lambda)
    : count_(count), dim_(dim), points_(std::move(points)), delta_(delta), lambda_(lambda) {
  if (count == 0 || dim == 0 || points_.size() != count * dim) {
    throw Error(ErrorKind::DimensionMismatch, "dictionary needs count*dim coordinates");
  }
}

double Dictionary::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t j = i + 1; j < count_; ++j) {
      best = std::min(best, std::sqrt(squared_distance(point(i), point(j))));
    }
  }
  return best;
}

bool Dictionary::within_support() const {
  for (std::size_t i = 0; i < count_; ++i) {
    double sq = 0.0;
    for (double v : point(i)) sq += v * v;
    if (sq > delta_ * delta_) return false;
  }
  return true;
}

void Dictionary::require_distinct() const {
  if (count_ > 1 && min_pairwise_distance() < kZeroTolerance) {
    throw Error(ErrorKind::DegenerateDictionary, "two codebook points coincide");
  }
}

std::size_t voronoi_index(const Dictionary& dict, std::span<const double> u) {
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dict.count(); ++i) {
    const double sq = squared_distance(dict.point(i), u);
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return best;
}

Param kohonen_field(const Dictionary& dict, std::span<const double> u) {
  dict.require_distinct();
  const std::size_t d = dict.dim();
  Param out(dict.count() * d);
  const std::size_t win = voronoi_index(dict, u);
  const auto tw = dict.point(win);
  for (std::size_t k = 0; k < d; ++k) out[win * d + k] = 2.0 * (u[k] - tw[k]);

  if (dict.lambda() != 0.0) {
    for (std::size_t i = 0; i < dict.count(); ++i) {
      const auto ti = dict.point(i);
      for (std::size_t j = 0; j < dict.count(); ++j) {
        if (j == i) continue;
        const auto tj = dict.point(j);
        const double sq = squared_distance(ti, tj);
        const double coef = dict.lambda() / (sq * sq);
        for (std::size_t k = 0; k < d; ++k) out[i * d + k] += coef * (ti[k] - tj[k]);
      }
    }
  }
  return out;
}

double distortion(const Dictionary& dict, std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "distortion");
  double acc = 0.0;
  for (const auto& x : samples) {
    acc += squared_distance(dict.point(voronoi_index(dict, x.span())), x.span());
  }
  return acc / static_cast<double>(samples.size());
}

double penalty_energy(const Dictionary& dict) {
  dict.require_distinct();
  double acc = 0.0;
  for (std::size_t i = 0; i < dict.count(); ++i) {
    for (std::size_t j = 0; j < dict.count(); ++j) {
      if (i != j) acc += 1.0 / squared_distance(dict.point(i), dict.point(j));
    }
  }
  return 0.25 * dict.lambda() * acc;
}

double penalized_lyap(const Dictionary& dict, std::span<const Param> samples) {
  return distortion(dict, samples) + penalty_energy(dict);
}

SeparationFamily::SeparationFamily(std::size_t count, std::size_t dim, double delta,
                                   std::uint64_t q0)
    : count_(count), dim_(dim), delta_(delta), q0_(q0) {
  if (q0 == 0) throw Error(ErrorKind::InvalidArgument, "separation family needs q0 >= 1");
}

std::uint64_t SeparationFamily::q0_for(const Dictionary& anchor) {
  const double sep = anchor.min_pairwise_distance();
  if (!(sep > 0.0)) {
    throw Error(ErrorKind::DegenerateDictionary, "anchor codebook has coincident points");
  }
  if (std::isinf(sep)) return 1;
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(1.0 / sep)));
}

bool SeparationFamily::contains(std::uint64_t index, const Param& theta) const {
  if (theta.size() != count_ * dim_) return false;
  const Dictionary dict(count_, dim_, theta, delta_, 0.0);
  if (!dict.within_support()) return false;
  if (count_ < 2) return true;
  const double need = 1.0 / static_cast<double>(index + q0_);
  return dict.min_pairwise_distance() >= need;
}

std::string SeparationFamily::describe() const {
  std::ostringstream os;
  os << "separation(N=" << count_ << ", d=" << dim_ << ", delta=" << delta_ << ", q0=" << q0_
     << ")";
  return os.str();
}

}  // namespace salab
