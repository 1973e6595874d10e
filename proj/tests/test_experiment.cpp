#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "salab/experiment.hpp"
#include "support.hpp"

using namespace salab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfigs[] = {
    R"({"experiment": "quantile", "seed": 1, "q": 0.9, "budget": 3000})",
    R"({"experiment": "quantile", "seed": 1, "q": 0.9, "budget": 3000, "kernel": {"type": "ar1"},
        "schedule": {"gamma0": 30}, "family": {"radius0": 0.5, "growth": 1.5}})",
    R"({"experiment": "median", "seed": 2, "budget": 3000, "thin": 7})",
    R"({"experiment": "kohonen", "seed": 3, "budget": 3000, "count": 3, "dim": 2, "lambda": 0.001,
        "kernel": {"type": "rwm", "scale": 0.3}})",
    R"({"experiment": "sace", "seed": 4, "budget": 3000, "q": 0.99})",
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("salab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t data_rows(const fs::path& trace) {
  std::ifstream in(trace);
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  while (std::getline(in, line)) ++rows;
  return rows;
}

CheckReport check_text(const std::string& text, const CompactFamily* family = nullptr) {
  std::istringstream is(text);
  return check_trace(is, family);
}

}  // namespace

TEST_CASE("runs are byte-identical across invocations for every experiment") {
  const fs::path dir = scratch("determinism");
  int k = 0;
  for (const char* text : kSmallConfigs) {
    for (auto seed : test::kSeeds) {
      json doc = json::parse(text);
      doc["seed"] = seed;
      const RunConfig c = parse_config(doc);
      const auto a = run_experiment(c, dir / ("a" + std::to_string(k)));
      const auto b = run_experiment(c, dir / ("b" + std::to_string(k)));
      CHECK(slurp(a.trace) == slurp(b.trace));
      CHECK(slurp(a.summary) == slurp(b.summary));
      ++k;
    }
  }
}

TEST_CASE("row-count contract") {
  const fs::path dir = scratch("rows");
  const RunConfig c = parse_config(R"({"experiment": "quantile", "seed": 1, "budget": 10, "thin": 1})");
  const auto files = run_experiment(c, dir);
  CHECK(data_rows(files.trace) == 10);
  std::ifstream in(files.trace);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,I,zeta,restart,theta_0");

  const RunConfig thin = parse_config(R"({"experiment": "quantile", "seed": 1, "budget": 100, "thin": 10})");
  CHECK(data_rows(run_experiment(thin, dir / "thin").trace) == 10);
}

TEST_CASE("summary contents") {
  const fs::path dir = scratch("summary");
  const RunConfig c = parse_config(kSmallConfigs[4]);
  const auto files = run_experiment(c, dir);
  const json s = json::parse(slurp(files.summary));
  for (const char* key : {"final_theta", "tail_mean", "truncation_count", "clip_events", "seed", "resolved_config",
                          "final_nu"}) {
    CHECK(s.contains(key));
  }
  CHECK(s["final_theta"].size() == 6);
  CHECK(s["resolved_config"].contains("theta0"));
  CHECK(s["resolved_config"].contains("sigma0"));

  std::ifstream in(files.trace);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,I,zeta,restart,theta_0,theta_1,theta_2,theta_3,theta_4,theta_5");

  const json q = json::parse(slurp(run_experiment(parse_config(kSmallConfigs[0]), dir / "q").summary));
  CHECK_FALSE(q.contains("clip_events"));
}

TEST_CASE("re-running the echoed config reproduces the trace") {
  const fs::path dir = scratch("echo");
  int k = 0;
  for (const char* text : kSmallConfigs) {
    const auto first = run_experiment(parse_config(text), dir / ("first" + std::to_string(k)));
    const json echoed = json::parse(slurp(first.summary))["resolved_config"];
    const auto second = run_experiment(parse_config(echoed), dir / ("second" + std::to_string(k)));
    CHECK(slurp(first.trace) == slurp(second.trace));
    ++k;
  }
}

TEST_CASE("quantile run reaches the 0.9 quantile of N(0,1)") {
  const RunResult r = execute(parse_config(R"({"experiment": "quantile", "seed": 1, "q": 0.9})"));
  CHECK(std::abs(r.tail_mean[0] - 1.2816) <= 0.02);
}

TEST_CASE("validator accepts every produced trace under the run's family") {
  const fs::path dir = scratch("validator");
  int k = 0;
  for (const char* text : kSmallConfigs) {
    for (auto seed : test::kSeeds) {
      json doc = json::parse(text);
      doc["seed"] = seed;
      const RunResult r = execute(parse_config(doc));
      std::ostringstream os;
      write_trace_csv(os, r.trace, r.config.anchor.size());
      const auto family = make_family(r.config);
      const CheckReport report = check_text(os.str(), family.get());
      CHECK_MESSAGE(report.ok(), (report.problems.empty() ? "" : report.problems.front()));
      CHECK(report.rows == r.trace.size());
      ++k;
    }
  }
}

TEST_CASE("validator flags broken bookkeeping") {
  const std::string header = "n,I,zeta,restart,theta_0\n";
  CHECK(check_text(header + "1,0,1,0,0.5\n2,1,0,1,2.5\n3,1,1,0,0.3\n").ok());
  CHECK_FALSE(check_text(header + "1,0,1,0,0.5\n2,1,1,1,2.5\n").ok());   // restart with zeta > 0
  CHECK_FALSE(check_text(header + "1,0,1,0,0.5\n2,2,0,1,2.5\n").ok());   // I jumps by two
  CHECK_FALSE(check_text(header + "1,0,1,0,0.5\n2,1,2,0,0.5\n").ok());   // I changes without restart
  CHECK_FALSE(check_text(header + "1,0,1,0,0.5\n2,0,3,0,0.5\n").ok());   // zeta skips
  CHECK_FALSE(check_text(header + "2,0,1,0,0.5\n1,0,2,0,0.5\n").ok());   // n decreases
  CHECK_FALSE(check_text(header + "1,0,1,0,nan\n").ok());
  CHECK_FALSE(check_text(header + "1,0,1,0\n").ok());
  CHECK_FALSE(check_text("n,I,theta_0\n1,0,0.5\n").ok());
  CHECK_FALSE(check_text(header).ok());
  CHECK(check_text(header + "10,0,10,0,0.5\n20,0,20,0,0.5\n").ok());     // thinned rows

  const BoxFamily family(1.0, 2.0);
  CHECK(check_text(header + "1,0,1,0,0.5\n2,1,0,1,1.5\n", &family).ok());
  CHECK_FALSE(check_text(header + "1,0,1,0,1.5\n", &family).ok());          // accepted row outside K_0
  CHECK_FALSE(check_text(header + "1,1,0,1,0.5\n", &family).ok());          // restart row inside K_0
}

TEST_CASE("seed ranges are half-open") {
  CHECK(parse_seed_range("0..100") == std::pair<std::uint64_t, std::uint64_t>{0, 100});
  CHECK(parse_seed_range("7") == std::pair<std::uint64_t, std::uint64_t>{7, 8});
  CHECK_THROWS_AS(parse_seed_range("5..5"), Error);
  CHECK_THROWS_AS(parse_seed_range("a..b"), Error);
}

TEST_CASE("sweep output does not depend on the thread count") {
  const json doc = json::parse(R"({"experiment": "quantile", "seed": 0, "q": 0.5, "budget": 2000})");
  const fs::path one = scratch("sweep1");
  const fs::path many = scratch("sweep4");
  const auto a = sweep(doc, 3, 11, one, 1);
  const auto b = sweep(doc, 3, 11, many, 4);
  REQUIRE(a.size() == 8);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].seed == 3 + k);
    REQUIRE(a[k].summary.has_value());
    const std::string sub = "seed_" + std::to_string(3 + k);
    CHECK(slurp(one / sub / "trace.csv") == slurp(many / sub / "trace.csv"));
    CHECK(a[k].summary->at("tail_mean") == b[k].summary->at("tail_mean"));
  }
  CHECK(slurp(one / "sweep.json") != "");
  // Runs differ across seeds, and a sweep seed equals the single run with that seed.
  CHECK(slurp(one / "seed_3" / "trace.csv") != slurp(one / "seed_4" / "trace.csv"));
  json single = doc;
  single["seed"] = 5;
  const auto files = run_experiment(parse_config(single), scratch("single"));
  CHECK(slurp(files.trace) == slurp(one / "seed_5" / "trace.csv"));
}

TEST_CASE("atomic writes leave no temporary files") {
  const fs::path dir = scratch("atomic");
  run_experiment(parse_config(kSmallConfigs[0]), dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("engine aborts propagate") {
  const RunConfig c = parse_config(R"({"experiment": "quantile", "seed": 1, "q": 0.9, "budget": 100000,
      "max_truncations": 2, "schedule": {"gamma0": 1000}, "family": {"radius0": 0.01, "growth": 1.01}})");
  try {
    execute(c);
    FAIL("expected TruncationCapExceeded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationCapExceeded);
  }
  const fs::path dir = scratch("unwritable");
  fs::path blocked = dir / "file";
  std::ofstream(blocked) << "x";
  try {
    run_experiment(parse_config(kSmallConfigs[0]), blocked / "sub");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("sace family bound is derived from the pilot anchor") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    json doc = json::parse(R"({"experiment": "sace", "q": 0.999, "budget": 50})");
    doc["seed"] = seed;
    const RunResult r = execute(parse_config(doc));
    const double s = r.config.sace_family.s_max0;
    CHECK(s >= 50.0);
    for (double v : *r.config.sace.sigma0) {
      CHECK(-s < v);
      CHECK(v < -1.0 / s);
    }
    CHECK(to_json(r.config)["family"]["s_max0"] == s);
  }
  CHECK_THROWS_AS(make_family(parse_config(R"({"experiment": "sace", "seed": 1})")), Error);
}
