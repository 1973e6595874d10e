#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "salab/core.hpp"
#include "salab/kernels.hpp"
#include "salab/sace.hpp"

namespace salab {

enum class Experiment { Quantile, Median, Kohonen, Sace };

const char* to_string(Experiment e) noexcept;

struct ScheduleConfig {
  double gamma0 = 1.0;
  double beta = 0.6;
};

/// Box family K_i = {|θ - anchor-free center 0|_inf <= radius0 * growth^i} (quantile, median).
struct BoxFamilyConfig {
  double radius0 = 2.0;
  double growth = 2.0;
};

/// Kohonen separation family; q0 = 0 means "derive from the anchor".
struct SeparationFamilyConfig {
  std::uint64_t q0 = 0;
};

/// SACE family; theta_max0 = 0 means "network max score", s_max0 = 0 means
/// "derive from the anchor sigma" (resolved at run time).
struct SaceFamilyConfig {
  double theta_max0 = 0.0;
  double s_max0 = 0.0;
  double growth = 2.0;
};

struct QuantileConfig {
  double q = 0.5;
  std::string phi = "identity";  // identity | abs | norm
};

struct KohonenConfig {
  std::size_t count = 2;
  std::size_t dim = 1;
  double lambda = 1e-4;
  double delta = 1.0;
};

struct SaceConfig {
  double q = 0.99;
  SaceEstimator estimator = SaceEstimator::Upper;
  double weight_cap = 1e12;
  std::vector<double> weights{1.0, 2.0, 3.0, 1.0, 2.0};
  std::vector<std::vector<std::size_t>> paths{{0, 3}, {1, 4}, {0, 2, 4}, {1, 2, 3}};
  std::size_t pilot_draws = 1000;
  std::size_t pilot_accept = 100;
  std::optional<double> theta0;
  std::optional<Param> sigma0;
  std::optional<Param> y0;
};

/// Fully validated run description. Every default is materialized, so
/// to_json(parse_config(x)) is itself a valid config that reproduces the run.
struct RunConfig {
  Experiment experiment = Experiment::Quantile;
  std::uint64_t seed = 0;
  std::uint64_t budget = 200'000;
  std::uint64_t thin = 1;
  std::uint64_t max_truncations = 10'000;
  std::string out_dir = "out";
  ScheduleConfig schedule;

  BoxFamilyConfig box_family;
  SeparationFamilyConfig separation_family;
  SaceFamilyConfig sace_family;

  std::optional<KernelSpec> kernel;  // unused by SACE
  nlohmann::json kernel_json;        // resolved form, echoed back

  Param anchor;       // θ*; SACE fills it from the pilot at run time
  Param chain_start;  // x*

  QuantileConfig quantile;
  KohonenConfig kohonen;
  SaceConfig sace;
};

/// Parses and validates a JSON document. Errors: ParseError, ValidationError
/// and UnknownField, each naming the offending field path.
RunConfig parse_config(std::string_view text);
RunConfig parse_config(const nlohmann::json& doc);
inline RunConfig parse_config(const char* text) { return parse_config(std::string_view(text)); }
inline RunConfig parse_config(const std::string& text) { return parse_config(std::string_view(text)); }

nlohmann::json to_json(const RunConfig& config);

Distribution parse_distribution(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(const Distribution& dist);

}  // namespace salab
