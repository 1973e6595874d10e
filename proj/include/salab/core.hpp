#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace salab {

enum class ErrorKind {
  NonFiniteField,
  InitOutsideSet,
  AnchorOutsideSet,
  TruncationCapExceeded,
  DimensionMismatch,
  DegenerateDictionary,
  EmptySamples,
  NonNegativeSufficientStat,
  DegenerateDraw,
  StateOutsideSupport,
  NoConvergence,
  InvalidArgument,
  ParseError,
  ValidationError,
  UnknownField,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

/// The single exception type of the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Dense real vector used for SA iterates, field values and chain states.
class Param {
 public:
  Param() = default;
  explicit Param(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {}
  Param(std::initializer_list<double> values) : coords_(values) {}
  explicit Param(std::vector<double> values) : coords_(std::move(values)) {}

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }
  double& operator[](std::size_t i) noexcept { return coords_[i]; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }

  auto begin() noexcept { return coords_.begin(); }
  auto end() noexcept { return coords_.end(); }
  auto begin() const noexcept { return coords_.begin(); }
  auto end() const noexcept { return coords_.end(); }

  std::span<double> span() noexcept { return coords_; }
  std::span<const double> span() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return coords_; }

  bool all_finite() const noexcept;

  Param& operator+=(const Param& other);
  Param& operator-=(const Param& other);
  Param& operator*=(double s) noexcept;

  friend bool operator==(const Param&, const Param&) = default;

 private:
  std::vector<double> coords_;
};

Param operator+(Param a, const Param& b);
Param operator-(Param a, const Param& b);
Param operator*(double s, Param a);

double dot(const Param& a, const Param& b);
double norm(const Param& a);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Throws DimensionMismatch when sizes differ.
void require_same_dim(const Param& a, const Param& b, const char* what);

/// Polynomial step sequence gamma0 / (offset + n + 1)^beta.
///
/// beta is restricted to (1/2, 1]: the upper end keeps the sum of steps
/// divergent, the lower end is the checkable part of the convergence theory.
class StepSchedule {
 public:
  StepSchedule(double gamma0, double beta, std::uint64_t offset = 0);

  double gamma0() const noexcept { return gamma0_; }
  double beta() const noexcept { return beta_; }
  std::uint64_t offset() const noexcept { return offset_; }

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  double gamma0_;
  double beta_;
  std::uint64_t offset_;
};

double gamma_at(const StepSchedule& s, std::uint64_t n) noexcept;
StepSchedule shift(const StepSchedule& s, std::uint64_t q) noexcept;

/// Indexed family of nested compact sets K_0 ⊆ K_1 ⊆ ... of the parameter space.
class CompactFamily {
 public:
  virtual ~CompactFamily() = default;
  virtual bool contains(std::uint64_t index, const Param& theta) const = 0;
  virtual std::string describe() const = 0;
};

/// K_i = {θ : max_k |θ_k - center_k| <= radius0 * growth^i}.
class BoxFamily final : public CompactFamily {
 public:
  BoxFamily(double radius0, double growth, Param center = {});
  bool contains(std::uint64_t index, const Param& theta) const override;
  std::string describe() const override;
  double radius(std::uint64_t index) const noexcept;

 private:
  double radius0_;
  double growth_;
  Param center_;
};

/// K_i = [lo_i, hi_i] with lo_i = center - (half0 + step*i), hi_i = center + (half0 + step*i).
class LinearIntervalFamily final : public CompactFamily {
 public:
  LinearIntervalFamily(double half0, double step, double center = 0.0);
  bool contains(std::uint64_t index, const Param& theta) const override;
  std::string describe() const override;

 private:
  double half0_;
  double step_;
  double center_;
};

/// Algorithm-2 machine state: chain state, iterate, active-set index I and
/// the number of accepted iterations zeta in the current active set.
template <class X>
struct StableState {
  X x;
  Param theta;
  std::uint64_t trunc_count = 0;
  std::uint64_t in_set_count = 0;
  std::uint64_t n = 0;
};

/// One engine iteration. `restart` is set iff the proposal left K_I, in which
/// case `theta` holds the rejected proposal and I has already been incremented.
struct TraceRecord {
  std::uint64_t n = 0;
  std::uint64_t trunc_count = 0;
  std::uint64_t in_set_count = 0;
  bool restart = false;
  Param theta;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

}  // namespace salab
