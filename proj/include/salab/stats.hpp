#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace salab::stats {

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased

double normal_cdf(double x);

/// Inverse of the standard normal CDF: Acklam's rational approximation refined
/// by one Halley step on erfc, accurate to ~1e-15 on (0, 1).
double normal_quantile(double p);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf);

/// Two-sample statistic sup |F_n - G_m|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical values at level alpha (c(0.01) = 1.6276, c(0.05) = 1.3581).
double ks_critical(double alpha, std::size_t n);
double ks_two_sample_critical(double alpha, std::size_t n, std::size_t m);

/// Lag-k sample autocorrelation.
double autocorrelation(std::span<const double> x, std::size_t lag);

}  // namespace salab::stats

#include <algorithm>

namespace salab::stats {

template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace salab::stats
