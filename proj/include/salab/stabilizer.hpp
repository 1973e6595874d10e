#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab {

/// Controlled transition sampler: draws X' ~ P_theta(x, .).
template <class K, class X>
concept TransitionKernel = requires(K kernel, const Param& theta, const X& x, Rng& rng) {
  { kernel(theta, x, rng) } -> std::convertible_to<X>;
};

/// Field evaluator H(theta, x).
template <class F, class X>
concept FieldFunction = requires(F field, const Param& theta, const X& x) {
  { field(theta, x) } -> std::convertible_to<Param>;
};

template <class X>
struct SaStep {
  Param theta;
  X x;
};

/// One Robbins-Monro step: draw x' from the kernel, then theta' = theta + rho * H(theta, x').
template <class X, class Kernel, class Field>
  requires TransitionKernel<Kernel, X> && FieldFunction<Field, X>
SaStep<X> sa_step(const Param& theta, const X& x, Kernel&& kernel, Field&& field, double rho,
                  Rng& rng) {
  X next = kernel(theta, x, rng);
  Param h = field(theta, next);
  require_same_dim(theta, h, "sa_step field value");
  if (!h.all_finite()) {
    throw Error(ErrorKind::NonFiniteField, "field returned a non-finite value");
  }
  h *= rho;
  h += theta;
  return {std::move(h), std::move(next)};
}

struct SaExit {
  bool exited = false;
  std::uint64_t n = 0;  // exit index when exited, else number of steps run
};

template <class X>
struct SaRun {
  std::vector<Param> thetas;  // theta_0 ... theta_n
  X final_x;
  SaExit exit;
};

/// Plain SA run on a single set K: stops at the first n >= 1 with theta_n not in K,
/// or after max_iters steps. Step n -> n+1 uses rho_{n+1} = gamma_at(schedule, n).
template <class X, class InSet, class Kernel, class Field>
  requires TransitionKernel<Kernel, X> && FieldFunction<Field, X>
SaRun<X> run_sa_until_exit(const X& x0, const Param& theta0, InSet&& in_set,
                           const StepSchedule& schedule, Kernel&& kernel, Field&& field,
                           std::uint64_t max_iters, Rng& rng) {
  if (!in_set(theta0)) {
    throw Error(ErrorKind::InitOutsideSet, "initial iterate is outside the active set");
  }
  if (max_iters == 0) {
    throw Error(ErrorKind::InvalidArgument, "max_iters must be at least 1");
  }
  SaRun<X> run{{theta0}, x0, {}};
  for (std::uint64_t n = 0; n < max_iters; ++n) {
    auto step = sa_step(run.thetas.back(), run.final_x, kernel, field, gamma_at(schedule, n), rng);
    run.final_x = std::move(step.x);
    run.thetas.push_back(std::move(step.theta));
    if (!in_set(run.thetas.back())) {
      run.exit = {true, n + 1};
      return run;
    }
  }
  run.exit = {false, max_iters};
  return run;
}

template <class X>
struct Anchor {
  X x;
  Param theta;
};

struct StableConfig {
  std::uint64_t budget = 1;
  std::uint64_t thin = 1;
  std::uint64_t max_truncations = 10'000;
  double tail_fraction = 0.1;
};

/// Passed to the optional observer before each transition.
struct StepEvent {
  std::uint64_t n;
  std::uint64_t trunc_count;
  std::uint64_t in_set_count;
  std::uint64_t step_index;  // index into the base schedule
  double gamma;
};

struct NoObserver {
  void operator()(const StepEvent&) const noexcept {}
};

/// One iteration of the truncated scheme. Returns true when the proposal left
/// K_I (a truncation): I is incremented, zeta reset, and the next call restarts
/// from the anchor.
template <class X, class Kernel, class Field, class Observer = NoObserver>
  requires TransitionKernel<Kernel, X> && FieldFunction<Field, X>
bool stable_step(StableState<X>& s, const Anchor<X>& anchor, const CompactFamily& family,
                 const StepSchedule& schedule, Kernel&& kernel, Field&& field, Rng& rng,
                 Observer&& observer = {}) {
  if (s.in_set_count == 0) {
    s.x = anchor.x;
    s.theta = anchor.theta;
  }
  const std::uint64_t step_index = s.trunc_count + s.in_set_count + 1;
  const double gamma = gamma_at(schedule, step_index);
  observer(StepEvent{s.n, s.trunc_count, s.in_set_count, step_index, gamma});

  auto step = sa_step(s.theta, s.x, kernel, field, gamma, rng);
  s.x = std::move(step.x);
  s.theta = std::move(step.theta);
  ++s.n;
  if (family.contains(s.trunc_count, s.theta)) {
    ++s.in_set_count;
    return false;
  }
  ++s.trunc_count;
  s.in_set_count = 0;
  return true;
}

template <class X>
struct StableRun {
  std::vector<TraceRecord> trace;
  StableState<X> final_state;
  Param tail_mean;
  std::uint64_t tail_samples = 0;
  std::uint64_t truncation_count = 0;
  std::uint64_t last_restart_n = 0;  // 0 when no truncation happened
};

/// Self-stabilized SA: run `budget` iterations of stable_step from the anchor
/// and record the trace (every `thin`-th row plus every restart row).
template <class X, class Kernel, class Field, class Observer = NoObserver>
  requires TransitionKernel<Kernel, X> && FieldFunction<Field, X>
StableRun<X> run_stable_sa(const StableConfig& config, const CompactFamily& family,
                           Kernel&& kernel, Field&& field, const StepSchedule& schedule,
                           const Anchor<X>& anchor, Rng& rng, Observer&& observer = {}) {
  if (!family.contains(0, anchor.theta)) {
    throw Error(ErrorKind::AnchorOutsideSet, "anchor is outside K_0 of " + family.describe());
  }
  if (config.budget == 0 || config.thin == 0) {
    throw Error(ErrorKind::InvalidArgument, "budget and thin must be positive");
  }
  const auto tail_len = static_cast<std::uint64_t>(
      std::ceil(config.tail_fraction * static_cast<double>(config.budget)));
  const std::uint64_t tail_start = config.budget - std::min(tail_len, config.budget);

  StableRun<X> run;
  run.final_state = StableState<X>{anchor.x, anchor.theta, 0, 0, 0};
  run.tail_mean = Param(anchor.theta.size());
  run.trace.reserve(static_cast<std::size_t>(config.budget / config.thin + 1));
  auto& s = run.final_state;

  for (std::uint64_t it = 0; it < config.budget; ++it) {
    const bool restart = stable_step(s, anchor, family, schedule, kernel, field, rng, observer);
    if (restart) {
      run.last_restart_n = s.n;
      if (s.trunc_count > config.max_truncations) {
        std::ostringstream os;
        os << "active-set index exceeded " << config.max_truncations << " at iteration " << s.n
           << " (divergent field or misconfigured family " << family.describe() << ")";
        throw Error(ErrorKind::TruncationCapExceeded, os.str());
      }
    } else if (it >= tail_start) {
      run.tail_mean += s.theta;
      ++run.tail_samples;
    }
    if (restart || s.n % config.thin == 0) {
      run.trace.push_back(TraceRecord{s.n, s.trunc_count, s.in_set_count, restart, s.theta});
    }
  }
  run.truncation_count = s.trunc_count;
  if (run.tail_samples > 0) {
    run.tail_mean *= 1.0 / static_cast<double>(run.tail_samples);
  } else {
    run.tail_mean = s.theta;
  }
  return run;
}

}  // namespace salab
