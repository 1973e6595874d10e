#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "salab/core.hpp"
#include "salab/rng.hpp"

namespace salab::test {

// Property suites run under each of these seeds.
inline constexpr std::array<std::uint64_t, 3> kSeeds{11, 2024, 987654321};

inline Param uniform_param(Rng& rng, std::size_t dim, double lo, double hi) {
  Param p(dim);
  for (auto& v : p) v = rng.uniform(lo, hi);
  return p;
}

inline std::vector<double> first_coords(const std::vector<Param>& pts) {
  std::vector<double> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p[0]);
  return out;
}

}  // namespace salab::test
