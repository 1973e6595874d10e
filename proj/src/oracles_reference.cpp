// Serial reference implementations of the parallel oracle kernels.

#include <cmath>
#include <limits>

#include "salab/oracles.hpp"

namespace salab::oracles::reference {

MeanEstimate mean_of(const std::function<Param(const Param&)>& f, std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "mean_of");
  const std::size_t dim = f(samples.front()).size();
  Param total(dim);
  Param total_sq(dim);
  for (const auto& x : samples) {
    const Param v = f(x);
    for (std::size_t k = 0; k < dim; ++k) {
      total[k] += v[k];
      total_sq[k] += v[k] * v[k];
    }
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
  Param m(dim);
  for (const auto& x : samples) m += x;
  m *= 1.0 / static_cast<double>(samples.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    Param num(dim);
    double den = 0.0;
    for (const auto& x : samples) {
      const double dist = std::sqrt(squared_distance(x.span(), m.span()));
      if (dist < 1e-12) continue;
      for (std::size_t k = 0; k < dim; ++k) num[k] += x[k] / dist;
      den += 1.0 / dist;
    }
    if (den == 0.0) return m;
    num *= 1.0 / den;
    const double step = std::sqrt(squared_distance(num.span(), m.span()));
    m = std::move(num);
    if (step <= tol * std::max(1.0, norm(m))) return m;
  }
  throw Error(ErrorKind::NoConvergence, "weiszfeld did not converge within max_iter");
}

namespace {

std::size_t nearest(const Param& codebook, std::size_t count, std::size_t dim, const Param& x,
                    double& best_sq) {
  std::size_t best = 0;
  best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    const double sq = squared_distance(codebook.span().subspan(i * dim, dim), x.span());
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return best;
}

}  // namespace

double codebook_distortion(std::span<const double> codebook, std::size_t count,
                           std::span<const Param> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "codebook_distortion");
  const std::size_t dim = samples.front().size();
  const Param book(std::vector<double>(codebook.begin(), codebook.end()));
  double total = 0.0;
  for (const auto& x : samples) {
    double sq = 0.0;
    nearest(book, count, dim, x, sq);
    total += sq;
  }
  return total / static_cast<double>(samples.size());
}

LloydResult lloyd(std::span<const Param> samples, std::size_t count, std::size_t iters, Rng& rng) {
  if (samples.empty()) throw Error(ErrorKind::EmptySamples, "lloyd");
  const std::size_t dim = samples.front().size();
  // Same initialization stream as the parallel version.
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  LloydResult out{count, dim, Param(count * dim), {}};
  std::size_t taken = 0;
  for (std::size_t idx : order) {
    if (taken == count) break;
    bool duplicate = false;
    for (std::size_t j = 0; j < taken && !duplicate; ++j) {
      duplicate =
          squared_distance(out.codebook.span().subspan(j * dim, dim), samples[idx].span()) == 0;
    }
    if (duplicate) continue;
    std::copy(samples[idx].begin(), samples[idx].end(), out.codebook.begin() + taken * dim);
    ++taken;
  }
  if (taken < count) {
    throw Error(ErrorKind::InvalidArgument, "lloyd: fewer distinct samples than codebook size");
  }

  for (std::size_t sweep = 0; sweep <= iters; ++sweep) {
    std::vector<double> sums(count * dim, 0.0);
    std::vector<std::size_t> members(count, 0);
    double total = 0.0;
    for (const auto& x : samples) {
      double sq = 0.0;
      const std::size_t cell = nearest(out.codebook, count, dim, x, sq);
      total += sq;
      ++members[cell];
      for (std::size_t k = 0; k < dim; ++k) sums[cell * dim + k] += x[k];
    }
    out.distortion_history.push_back(total / static_cast<double>(samples.size()));
    if (sweep == iters) break;
    for (std::size_t c = 0; c < count; ++c) {
      if (members[c] == 0) {
        const Param& seed = samples[rng.below(samples.size())];
        std::copy(seed.begin(), seed.end(), out.codebook.begin() + c * dim);
        continue;
      }
      for (std::size_t k = 0; k < dim; ++k) {
        out.codebook[c * dim + k] = sums[c * dim + k] / static_cast<double>(members[c]);
      }
    }
  }
  return out;
}

}  // namespace salab::oracles::reference
