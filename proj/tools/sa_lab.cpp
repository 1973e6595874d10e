// sa-lab: run, sweep, check and oracle front end.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "salab/bridge.hpp"
#include "salab/config.hpp"
#include "salab/experiment.hpp"
#include "salab/kernels.hpp"
#include "salab/oracles.hpp"

namespace {

using nlohmann::json;
using namespace salab;

Distribution distribution_arg(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("--dist: ") + e.what());
  }
  return parse_distribution(doc, "dist");
}

double score(const std::string& phi_name, const Param& x) {
  if (phi_name == "abs") return std::abs(x[0]);
  if (phi_name == "norm") return norm(x);
  return x[0];
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  const RunConfig config = load_config(config_path, seed, out);
  const auto files = run_experiment(config, config.out_dir);
  std::cout << files.trace.string() << "\n" << files.summary.string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& seeds,
              std::optional<std::string> out, int threads) {
  const json doc = load_config_json(config_path);
  const auto [first, last] = parse_seed_range(seeds);
  std::string root = out.value_or(doc.value("out_dir", std::string("out")));
  const auto entries = sweep(doc, first, last, root, threads);
  int failed = 0;
  for (const auto& e : entries) {
    if (!e.summary) {
      std::cerr << "seed " << e.seed << ": " << e.error << "\n";
      ++failed;
    }
  }
  std::cout << (entries.size() - failed) << "/" << entries.size() << " runs written to " << root
            << "\n";
  return failed == 0 ? 0 : 1;
}

int cmd_check(const std::string& trace_path, std::optional<std::string> config_path) {
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + trace_path);
  std::unique_ptr<CompactFamily> family;
  if (config_path) {
    RunConfig config = load_config(*config_path);
    family = make_family(config);
  }
  const CheckReport report = check_trace(in, family.get());
  if (report.ok()) {
    std::cout << "ok: " << report.rows << " rows, dim " << report.dim << "\n";
    return 0;
  }
  for (const auto& p : report.problems) std::cout << p << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-stabilized stochastic approximation lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run one experiment and write trace.csv and summary.json");
  run->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Override the output directory");

  std::string seeds;
  int threads = 0;
  auto* sw = app.add_subcommand("sweep", "Run a half-open seed range a..b in parallel");
  sw->add_option("--config", config_path, "JSON config")->required()->check(CLI::ExistingFile);
  sw->add_option("--seeds", seeds, "Seed range a..b (b excluded)")->required();
  sw->add_option("--out", out, "Root directory for seed_<s> subdirectories");
  sw->add_option("--threads", threads, "Worker threads (0: OpenMP default)");

  std::string trace_path;
  std::optional<std::string> check_config;
  auto* check = app.add_subcommand("check", "Validate the bookkeeping of a trace");
  check->add_option("trace", trace_path, "trace.csv")->required();
  check->add_option("--config", check_config, "Config whose family membership is also checked");

  auto* oracle = app.add_subcommand("oracle", "Independent reference values as one JSON value");
  oracle->require_subcommand(1);
  std::string dist_text;
  std::string phi_name = "identity";
  double q = 0.5;
  std::size_t n = 1'000'000;
  std::uint64_t oracle_seed = 0;
  bool bridge = false;
  auto* mcq = oracle->add_subcommand("mc-quantile", "Empirical q-quantile of phi(X)");
  mcq->add_option("--dist", dist_text, "Distribution JSON, e.g. {\"type\":\"normal\",\"mean\":[0]}");
  mcq->add_flag("--bridge", bridge, "Use phi of the default bridge network on the uniform cube");
  mcq->add_option("--phi", phi_name, "identity | abs | norm")
      ->check(CLI::IsMember({"identity", "abs", "norm"}));
  mcq->add_option("--q", q, "Level in (0, 1)")->required();
  mcq->add_option("--n", n, "Sample size");
  mcq->add_option("--seed", oracle_seed, "Seed");

  double tol = 1e-10;
  std::size_t max_iter = 10'000;
  auto* wz = oracle->add_subcommand("weiszfeld", "Geometric median of n draws");
  wz->add_option("--dist", dist_text, "Distribution JSON")->required();
  wz->add_option("--n", n, "Sample size");
  wz->add_option("--seed", oracle_seed, "Seed");
  wz->add_option("--tol", tol, "Relative step tolerance");
  wz->add_option("--max-iter", max_iter, "Iteration cap");

  std::size_t count = 2;
  std::size_t iters = 100;
  auto* ll = oracle->add_subcommand("lloyd", "Batch Lloyd codebook on n draws");
  ll->add_option("--dist", dist_text, "Distribution JSON")->required();
  ll->add_option("--count", count, "Codebook size")->required();
  ll->add_option("--n", n, "Sample size");
  ll->add_option("--iters", iters, "Lloyd sweeps");
  ll->add_option("--seed", oracle_seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed, out);
    if (*sw) return cmd_sweep(config_path, seeds, out, threads);
    if (*check) return cmd_check(trace_path, check_config);
    if (*mcq) {
      double value = 0.0;
      if (bridge) {
        const BridgeNetwork net = BridgeNetwork::default_bridge();
        const std::size_t d = net.edges();
        value = oracles::mc_quantile(
            [d](Rng& rng) {
              Param u(d);
              for (auto& v : u) v = rng.uniform();
              return u;
            },
            [&net](const Param& u) { return phi(net, u.span()); }, q, n, oracle_seed);
      } else {
        if (dist_text.empty()) throw Error(ErrorKind::InvalidArgument, "--dist or --bridge required");
        const Distribution dist = distribution_arg(dist_text);
        value = oracles::mc_quantile([&dist](Rng& rng) { return sample(dist, rng); },
                                     [&phi_name](const Param& x) { return score(phi_name, x); }, q, n,
                                     oracle_seed);
      }
      std::cout << json(value).dump() << "\n";
      return 0;
    }
    if (*wz) {
      const Distribution dist = distribution_arg(dist_text);
      const auto pts = oracles::draw_points([&dist](Rng& rng) { return sample(dist, rng); }, n, oracle_seed);
      std::cout << json(oracles::weiszfeld(pts, tol, max_iter).values()).dump() << "\n";
      return 0;
    }
    if (*ll) {
      const Distribution dist = distribution_arg(dist_text);
      const auto pts = oracles::draw_points([&dist](Rng& rng) { return sample(dist, rng); }, n, oracle_seed);
      Rng rng(oracle_seed, streams::kDiagnostic);
      const auto res = oracles::lloyd(pts, count, iters, rng);
      json rows = json::array();
      for (std::size_t i = 0; i < res.count; ++i) {
        rows.push_back(std::vector<double>(res.codebook.begin() + static_cast<std::ptrdiff_t>(i * res.dim),
                                           res.codebook.begin() + static_cast<std::ptrdiff_t>((i + 1) * res.dim)));
      }
      std::cout << json{{"codebook", rows}, {"distortion", res.distortion_history.back()}}.dump() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "sa-lab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sa-lab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
