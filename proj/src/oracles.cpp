#include "salab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace salab::oracles {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

std::size_t nearest_row(std::span<const double> codebook, std::size_t count, std::size_t dim,
                        std::span<const double> x, double& best_sq) {
  std::size_t best = 0;
  best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = codebook[i * dim + k] - x[k];
      sq += diff * diff;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return best;
}

}  // namespace

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorKind::EmptySamples, "empirical_quantile");
  const auto n = values.size();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  const auto k = std::clamp<std::size_t>(rank, 1, n) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

MeanEstimate mean_of(const std::function<Param(const Param&)>& f, std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "mean_of");
  const std::size_t dim = f(samples.front()).size();
  const std::size_t blocks = block_count(samples.size());
  std::vector<Param> sums(blocks, Param(dim));
  std::vector<Param> squares(blocks, Param(dim));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(samples.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const Param v = f(samples[i]);
      for (std::size_t k = 0; k < dim; ++k) {
        sums[b][k] += v[k];
        squares[b][k] += v[k] * v[k];
      }
    }
  }
  Param total(dim);
  Param total_sq(dim);
  for (std::size_t b = 0; b < blocks; ++b) {
    total += sums[b];
    total_sq += squares[b];
  }
  const double n = static_cast<double>(samples.size());
  MeanEstimate est{Param(dim), Param(dim)};
  for (std::size_t k = 0; k < dim; ++k) {
    est.mean[k] = total[k] / n;
    const double var = std::max(0.0, (total_sq[k] - n * est.mean[k] * est.mean[k]) / (n - 1.0));
    est.std_error[k] = n > 1.0 ? std::sqrt(var / n) : 0.0;
  }
  return est;
}

Param weiszfeld(std::span<const Param> samples, double tol, std::size_t max_iter) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "weiszfeld");
  const std::size_t dim = samples.front().size();
  const std::size_t blocks = block_count(samples.size());

  Param m(dim);
  for (const auto& x : samples) m += x;
  m *= 1.0 / static_cast<double>(samples.size());

  std::vector<Param> nums(blocks, Param(dim));
  std::vector<double> dens(blocks);
  for (std::size_t it = 0; it < max_iter; ++it) {
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < blocks; ++b) {
      Param num(dim);
      double den = 0.0;
      const std::size_t end = std::min(samples.size(), (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) {
        const double dist = std::sqrt(squared_distance(samples[i].span(), m.span()));
        if (dist < 1e-12) continue;
        const double w = 1.0 / dist;
        for (std::size_t k = 0; k < dim; ++k) num[k] += w * samples[i][k];
        den += w;
      }
      nums[b] = std::move(num);
      dens[b] = den;
    }
    Param num(dim);
    double den = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      num += nums[b];
      den += dens[b];
    }
    if (den == 0.0) return m;  // every sample sits on the iterate
    num *= 1.0 / den;
    const double step = std::sqrt(squared_distance(num.span(), m.span()));
    m = std::move(num);
    if (step <= tol * std::max(1.0, norm(m))) return m;
  }
  throw Error(ErrorKind::NoConvergence, "weiszfeld did not converge within max_iter");
}

Param finite_diff_grad(const std::function<double(const Param&)>& f, const Param& theta,
                       double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite_diff_grad needs h > 0");
  Param grad(theta.size());
  Param probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + h;
    const double up = f(probe);
    probe[i] = theta[i] - h;
    const double down = f(probe);
    probe[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

namespace {

Param initial_codebook(std::span<const Param> samples, std::size_t count, Rng& rng) {
  const std::size_t dim = samples.front().size();
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  Param codebook(count * dim);
  std::size_t taken = 0;
  for (std::size_t idx : order) {
    if (taken == count) break;
    bool duplicate = false;
    for (std::size_t j = 0; j < taken && !duplicate; ++j) {
      duplicate = squared_distance(codebook.span().subspan(j * dim, dim), samples[idx].span()) == 0;
    }
    if (duplicate) continue;
    std::copy(samples[idx].begin(), samples[idx].end(), codebook.begin() + taken * dim);
    ++taken;
  }
  if (taken < count) {
    throw Error(ErrorKind::InvalidArgument, "lloyd: fewer distinct samples than codebook size");
  }
  return codebook;
}

}  // namespace

double codebook_distortion(std::span<const double> codebook, std::size_t count,
                           std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "codebook_distortion");
  const std::size_t dim = samples.front().size();
  const std::size_t blocks = block_count(samples.size());
  std::vector<double> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    double acc = 0.0;
    const std::size_t end = std::min(samples.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      double sq = 0.0;
      nearest_row(codebook, count, dim, samples[i].span(), sq);
      acc += sq;
    }
    partial[b] = acc;
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total / static_cast<double>(samples.size());
}

LloydResult lloyd(std::span<const Param> samples, std::size_t count, std::size_t iters, Rng& rng) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "lloyd");
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "lloyd needs count >= 1");
  const std::size_t dim = samples.front().size();
  const std::size_t blocks = block_count(samples.size());
  LloydResult out{count, dim, initial_codebook(samples, count, rng), {}};

  std::vector<std::vector<double>> sums(blocks, std::vector<double>(count * dim));
  std::vector<std::vector<std::size_t>> counts(blocks, std::vector<std::size_t>(count));
  std::vector<double> partial(blocks);

  for (std::size_t sweep = 0; sweep <= iters; ++sweep) {
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < blocks; ++b) {
      std::fill(sums[b].begin(), sums[b].end(), 0.0);
      std::fill(counts[b].begin(), counts[b].end(), 0);
      double acc = 0.0;
      const std::size_t end = std::min(samples.size(), (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) {
        double sq = 0.0;
        const std::size_t cell = nearest_row(out.codebook.span(), count, dim, samples[i].span(), sq);
        acc += sq;
        ++counts[b][cell];
        for (std::size_t k = 0; k < dim; ++k) sums[b][cell * dim + k] += samples[i][k];
      }
      partial[b] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;
    out.distortion_history.push_back(total / static_cast<double>(samples.size()));
    if (sweep == iters) break;

    for (std::size_t c = 0; c < count; ++c) {
      std::size_t members = 0;
      std::vector<double> centroid(dim, 0.0);
      for (std::size_t b = 0; b < blocks; ++b) {
        members += counts[b][c];
        for (std::size_t k = 0; k < dim; ++k) centroid[k] += sums[b][c * dim + k];
      }
      if (members == 0) {
        const Param& seed = samples[rng.below(samples.size())];
        std::copy(seed.begin(), seed.end(), out.codebook.begin() + c * dim);
        continue;
      }
      for (std::size_t k = 0; k < dim; ++k) {
        out.codebook[c * dim + k] = centroid[k] / static_cast<double>(members);
      }
    }
  }
  return out;
}

}  // namespace salab::oracles
