#pragma once

// Independent references for the SA experiments. Nothing here calls the
// stabilizer or the field adapters; the Monte Carlo loops are OpenMP-parallel
// over fixed-size blocks whose random streams depend only on (seed, block), so
// results do not depend on the thread count. Serial twins in `reference` are
// kept for testing and benchmarking.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab::oracles {

inline constexpr std::size_t kBlock = 1 << 14;

inline Rng block_rng(std::uint64_t seed, std::size_t block) {
  return Rng(seed, streams::kOracle + block);
}

/// n points, point i drawn from block_rng(seed, i / kBlock).
template <class Draw>
std::vector<Param> draw_points(Draw&& draw, std::size_t n, std::uint64_t seed) {
  std::vector<Param> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < blocks; ++b) {
    Rng rng = block_rng(seed, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out[i] = draw(rng);
  }
  return out;
}

/// Scores phi(X_i) of n i.i.d. draws, same stream layout as draw_points.
template <class Draw, class Score>
std::vector<double> draw_scores(Draw&& draw, Score&& phi, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < blocks; ++b) {
    Rng rng = block_rng(seed, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out[i] = phi(draw(rng));
  }
  return out;
}

/// Lower (type-1) empirical quantile: smallest v with F_n(v) >= q.
double empirical_quantile(std::vector<double> values, double q);

template <class Draw, class Score>
double mc_quantile(Draw&& draw, Score&& phi, double q, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "mc_quantile needs n >= 1");
  return empirical_quantile(draw_scores(draw, phi, n, seed), q);
}

struct MeanEstimate {
  Param mean;
  Param std_error;
};

/// Componentwise mean and standard error of f(x_i) over the samples.
MeanEstimate mean_of(const std::function<Param(const Param&)>& f, std::span<const Param> samples);

/// Geometric median by Weiszfeld iterations from the coordinate mean. A sample
/// within 1e-12 of the iterate is dropped for that sweep.
Param weiszfeld(std::span<const Param> samples, double tol, std::size_t max_iter);

/// Central differences (f(theta + h e_i) - f(theta - h e_i)) / 2h.
Param finite_diff_grad(const std::function<double(const Param&)>& f, const Param& theta, double h);

struct LloydResult {
  std::size_t count = 0;
  std::size_t dim = 0;
  Param codebook;                       // row-major count x dim
  std::vector<double> distortion_history;  // initial codebook, then after each sweep
};

/// Batch Lloyd from `count` distinct samples chosen at random; an empty cell
/// is re-seeded at a random sample.
LloydResult lloyd(std::span<const Param> samples, std::size_t count, std::size_t iters, Rng& rng);

/// Mean squared distance to the nearest codebook row.
double codebook_distortion(std::span<const double> codebook, std::size_t count,
                           std::span<const Param> samples);

namespace reference {

template <class Draw, class Score>
std::vector<double> draw_scores(Draw&& draw, Score&& phi, std::size_t n, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b * kBlock < n; ++b) {
    Rng rng = block_rng(seed, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out.push_back(phi(draw(rng)));
  }
  return out;
}

template <class Draw, class Score>
double mc_quantile(Draw&& draw, Score&& phi, double q, std::size_t n, std::uint64_t seed) {
  auto scores = draw_scores(draw, phi, n, seed);
  std::sort(scores.begin(), scores.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  return scores[std::clamp<std::size_t>(rank, 1, n) - 1];
}

MeanEstimate mean_of(const std::function<Param(const Param&)>& f, std::span<const Param> samples);
Param weiszfeld(std::span<const Param> samples, double tol, std::size_t max_iter);
LloydResult lloyd(std::span<const Param> samples, std::size_t count, std::size_t iters, Rng& rng);
double codebook_distortion(std::span<const double> codebook, std::size_t count,
                           std::span<const Param> samples);

}  // namespace reference

}  // namespace salab::oracles
