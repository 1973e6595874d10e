#include "salab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace salab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonFiniteField: return "NonFiniteField";
    case ErrorKind::InitOutsideSet: return "InitOutsideSet";
    case ErrorKind::AnchorOutsideSet: return "AnchorOutsideSet";
    case ErrorKind::TruncationCapExceeded: return "TruncationCapExceeded";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateDictionary: return "DegenerateDictionary";
    case ErrorKind::EmptySamples: return "EmptySamples";
    case ErrorKind::NonNegativeSufficientStat: return "NonNegativeSufficientStat";
    case ErrorKind::DegenerateDraw: return "DegenerateDraw";
    case ErrorKind::StateOutsideSupport: return "StateOutsideSupport";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::UnknownField: return "UnknownField";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

bool Param::all_finite() const noexcept {
  return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
}

Param& Param::operator+=(const Param& other) {
  require_same_dim(*this, other, "Param::operator+=");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

Param& Param::operator-=(const Param& other) {
  require_same_dim(*this, other, "Param::operator-=");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

Param& Param::operator*=(double s) noexcept {
  for (double& v : coords_) v *= s;
  return *this;
}

Param operator+(Param a, const Param& b) { return a += b; }
Param operator-(Param a, const Param& b) { return a -= b; }
Param operator*(double s, Param a) { return a *= s; }

double dot(const Param& a, const Param& b) {
  require_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const Param& a) { return std::sqrt(dot(a, a)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

void require_same_dim(const Param& a, const Param& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": dimensions " << a.size() << " and " << b.size() << " differ";
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
}

StepSchedule::StepSchedule(double gamma0, double beta, std::uint64_t offset)
    : gamma0_(gamma0), beta_(beta), offset_(offset) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
    throw Error(ErrorKind::InvalidArgument, "step schedule gamma0 must be positive and finite");
  }
  if (!(beta > 0.5 && beta <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "step schedule beta must lie in (1/2, 1]");
  }
}

double gamma_at(const StepSchedule& s, std::uint64_t n) noexcept {
  const double denom = static_cast<double>(s.offset() + n) + 1.0;
  return s.gamma0() / std::pow(denom, s.beta());
}

StepSchedule shift(const StepSchedule& s, std::uint64_t q) noexcept {
  return StepSchedule(s.gamma0(), s.beta(), s.offset() + q);
}

BoxFamily::BoxFamily(double radius0, double growth, Param center)
    : radius0_(radius0), growth_(growth), center_(std::move(center)) {
  if (!(radius0 > 0.0) || !(growth > 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "box family needs radius0 > 0 and growth > 1");
  }
}

double BoxFamily::radius(std::uint64_t index) const noexcept {
  return radius0_ * std::pow(growth_, static_cast<double>(index));
}

bool BoxFamily::contains(std::uint64_t index, const Param& theta) const {
  const double r = radius(index);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double c = center_.empty() ? 0.0 : center_[k];
    if (!(std::abs(theta[k] - c) <= r)) return false;
  }
  return true;
}

std::string BoxFamily::describe() const {
  std::ostringstream os;
  os << "box(radius0=" << radius0_ << ", growth=" << growth_ << ")";
  return os.str();
}

LinearIntervalFamily::LinearIntervalFamily(double half0, double step, double center)
    : half0_(half0), step_(step), center_(center) {
  if (!(half0 > 0.0) || !(step > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "interval family needs half0 > 0 and step > 0");
  }
}

bool LinearIntervalFamily::contains(std::uint64_t index, const Param& theta) const {
  const double half = half0_ + step_ * static_cast<double>(index);
  for (double v : theta) {
    if (!(std::abs(v - center_) <= half)) return false;
  }
  return true;
}

std::string LinearIntervalFamily::describe() const {
  std::ostringstream os;
  os << "interval(half0=" << half0_ << ", step=" << step_ << ")";
  return os.str();
}

}  // namespace salab
