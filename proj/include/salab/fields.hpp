#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "salab/core.hpp"

namespace salab {

/// Norm threshold below which two points are treated as equal.
inline constexpr double kZeroTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Quantile of a score phi(X).

using Score = std::function<double(const Param&)>;

struct QuantileSpec {
  double q = 0.5;
  Score phi;

  QuantileSpec(double level, Score score);
};

/// q - 1{phi(x) <= theta}; the boundary counts as below.
double quantile_field(const QuantileSpec& spec, double theta, const Param& x);

/// Monte Carlo w'(theta) = P_n(phi <= theta) - q over precomputed scores.
double quantile_lyap_deriv(double q, double theta, std::span<const double> scores);

/// Monte Carlo w(theta) = mean |theta - phi| / 2 + (1/2 - q) theta.
double quantile_lyap(double q, double theta, std::span<const double> scores);

/// Engine adapter: one-dimensional iterate.
struct QuantileField {
  QuantileSpec spec;
  Param operator()(const Param& theta, const Param& x) const {
    return Param{quantile_field(spec, theta[0], x)};
  }
};

// ---------------------------------------------------------------------------
// Geometric median.

/// (x - theta)/|x - theta|, or zero when |x - theta| <= kZeroTolerance.
Param median_field(const Param& theta, const Param& x);

/// Monte Carlo E|X - theta|.
double median_lyap(const Param& theta, std::span<const Param> samples);

struct MedianField {
  Param operator()(const Param& theta, const Param& x) const { return median_field(theta, x); }
};

// ---------------------------------------------------------------------------
// Penalized 0-neighbour Kohonen quantization.

/// Codebook of N points in R^d stored row-major as one flat Param, with the
/// support radius and repulsion strength of the penalized scheme.
class Dictionary {
 public:
  Dictionary(std::size_t count, std::size_t dim, Param points, double delta, double lambda);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }
  double delta() const noexcept { return delta_; }
  double lambda() const noexcept { return lambda_; }
  const Param& points() const noexcept { return points_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return points_.span().subspan(i * dim_, dim_);
  }

  double min_pairwise_distance() const;
  bool within_support() const;

  /// Throws DegenerateDictionary if two points are closer than kZeroTolerance.
  void require_distinct() const;

 private:
  std::size_t count_;
  std::size_t dim_;
  Param points_;
  double delta_;
  double lambda_;
};

/// Nearest codebook entry, ties to the lowest index.
std::size_t voronoi_index(const Dictionary& dict, std::span<const double> u);

/// Block i: 2 (u - theta_i) 1{i wins} + lambda sum_{j != i} (theta_i - theta_j) / |theta_i - theta_j|^4.
/// This is minus the gradient of penalized_lyap's integrand, so the repulsion
/// keeps codebook points apart.
Param kohonen_field(const Dictionary& dict, std::span<const double> u);

/// Mean squared distance from each sample to its nearest codebook point.
double distortion(const Dictionary& dict, std::span<const Param> samples);

/// (lambda / 4) sum over ordered pairs i != j of |theta_i - theta_j|^-2.
double penalty_energy(const Dictionary& dict);

double penalized_lyap(const Dictionary& dict, std::span<const Param> samples);

struct KohonenField {
  std::size_t count;
  std::size_t dim;
  double delta;
  double lambda;
  Param operator()(const Param& theta, const Param& x) const {
    return kohonen_field(Dictionary(count, dim, theta, delta, lambda), x.span());
  }
};

/// K_i = {theta : min pairwise distance >= 1/(i + q0)} ∩ ball(0, delta)^N.
class SeparationFamily final : public CompactFamily {
 public:
  SeparationFamily(std::size_t count, std::size_t dim, double delta, std::uint64_t q0);

  /// Smallest q0 >= 1 with 1/q0 <= min pairwise distance of `anchor`.
  static std::uint64_t q0_for(const Dictionary& anchor);

  bool contains(std::uint64_t index, const Param& theta) const override;
  std::string describe() const override;
  std::uint64_t q0() const noexcept { return q0_; }

 private:
  std::size_t count_;
  std::size_t dim_;
  double delta_;
  std::uint64_t q0_;
};

}  // namespace salab
