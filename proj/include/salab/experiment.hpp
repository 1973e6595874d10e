#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "salab/config.hpp"
#include "salab/core.hpp"

namespace salab {

struct RunResult {
  RunConfig config;  // resolved; SACE carries the pilot anchor
  std::vector<TraceRecord> trace;
  Param final_theta;  // last accepted iterate, or the anchor right after a truncation
  Param tail_mean;
  std::uint64_t tail_samples = 0;
  std::uint64_t truncation_count = 0;
  std::uint64_t clip_events = 0;
  std::uint64_t last_restart_n = 0;
  std::optional<Param> final_nu;  // SACE only
};

/// Runs the stabilized scheme for the configured experiment on Rng(seed, streams::kMain).
RunResult execute(const RunConfig& config);

/// The compact family the run uses (SACE needs the resolved config).
std::unique_ptr<CompactFamily> make_family(const RunConfig& config);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t dim);
nlohmann::json summary_json(const RunResult& result);

struct RunFiles {
  std::filesystem::path trace;
  std::filesystem::path summary;
};

/// execute + write trace.csv and summary.json into out_dir, each via temp file and rename.
RunFiles run_experiment(const RunConfig& config, const std::filesystem::path& out_dir);

struct CheckReport {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<std::string> problems;
  bool ok() const noexcept { return problems.empty(); }
};

/// Validates the bookkeeping of a trace: rows in increasing n, restart rows
/// carry zeta = 0 and raise I by one, other rows continue zeta from the
/// previous row and keep I. With a family, accepted rows must lie in K_I and
/// restart rows outside K_{I-1}.
CheckReport check_trace(std::istream& is, const CompactFamily* family = nullptr);

struct SweepEntry {
  std::uint64_t seed = 0;
  std::optional<nlohmann::json> summary;
  std::string error;
};

/// Runs seeds [first, last) of the config document concurrently, each into
/// out_root/seed_<s>, and writes out_root/sweep.json. Seed-dependent defaults
/// are resolved per seed. threads = 0 uses the OpenMP default.
std::vector<SweepEntry> sweep(const nlohmann::json& doc, std::uint64_t first, std::uint64_t last,
                              const std::filesystem::path& out_root, int threads = 0);

/// Parses "a..b" (half-open) or a single seed "a".
std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text);

/// Reads a config file as JSON (ParseError, IoError).
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Reads and parses a config file, applying optional overrides before validation.
RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = {},
                      std::optional<std::string> out_dir = {});

}  // namespace salab
