#include "salab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <omp.h>

#include "salab/bridge.hpp"
#include "salab/fields.hpp"
#include "salab/kernels.hpp"
#include "salab/rng.hpp"
#include "salab/sace.hpp"
#include "salab/stabilizer.hpp"

namespace salab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

StableConfig stable_config(const RunConfig& c) {
  StableConfig s;
  s.budget = c.budget;
  s.thin = c.thin;
  s.max_truncations = c.max_truncations;
  return s;
}

Score make_score(const std::string& name) {
  if (name == "abs") return [](const Param& x) { return std::abs(x[0]); };
  if (name == "norm") return [](const Param& x) { return norm(x); };
  return [](const Param& x) { return x[0]; };
}

template <class X>
void fill_result(RunResult& out, StableRun<X>&& run, const Param& anchor_theta) {
  out.trace = std::move(run.trace);
  out.final_theta = run.final_state.in_set_count > 0 ? run.final_state.theta : anchor_theta;
  out.tail_mean = std::move(run.tail_mean);
  out.tail_samples = run.tail_samples;
  out.truncation_count = run.truncation_count;
  out.last_restart_n = run.last_restart_n;
}

RunResult execute_param_chain(const RunConfig& c, Rng& rng) {
  const KernelSpec spec = *c.kernel;
  auto kernel = [&spec](const Param&, const Param& x, Rng& r) { return kernel_step(spec, x, r); };
  const StepSchedule schedule(c.schedule.gamma0, c.schedule.beta);
  const auto family = make_family(c);
  const Anchor<Param> anchor{c.chain_start, c.anchor};

  RunResult out;
  out.config = c;
  switch (c.experiment) {
    case Experiment::Quantile: {
      const QuantileField field{QuantileSpec(c.quantile.q, make_score(c.quantile.phi))};
      fill_result(out, run_stable_sa(stable_config(c), *family, kernel, field, schedule, anchor, rng),
                  c.anchor);
      break;
    }
    case Experiment::Median:
      fill_result(out,
                  run_stable_sa(stable_config(c), *family, kernel, MedianField{}, schedule, anchor, rng),
                  c.anchor);
      break;
    case Experiment::Kohonen: {
      const KohonenField field{c.kohonen.count, c.kohonen.dim, c.kohonen.delta, c.kohonen.lambda};
      fill_result(out, run_stable_sa(stable_config(c), *family, kernel, field, schedule, anchor, rng),
                  c.anchor);
      break;
    }
    case Experiment::Sace:
      break;
  }
  return out;
}

// Smallest of 50 and the bounds that put every |sigma_l| strictly inside [1/S, S].
double derived_s_max(const Param& sigma) {
  double s = 50.0;
  for (double v : sigma) s = std::max({s, 2.0 / std::abs(v), 2.0 * std::abs(v)});
  return s;
}

RunResult execute_sace(const RunConfig& c, Rng& rng) {
  const BridgeNetwork net(c.sace.weights, c.sace.paths);
  RunConfig resolved = c;
  if (!c.sace.theta0 || !c.sace.sigma0 || !c.sace.y0) {
    Rng pilot_rng(c.seed, streams::kPilot);
    const SacePilot pilot = sace_pilot(net, c.sace.q, pilot_rng, c.sace.pilot_draws, c.sace.pilot_accept);
    if (!resolved.sace.theta0) resolved.sace.theta0 = pilot.theta0;
    if (!resolved.sace.sigma0) resolved.sace.sigma0 = pilot.sigma0;
    if (!resolved.sace.y0) resolved.sace.y0 = pilot.y0;
  }
  const double theta0 = *resolved.sace.theta0;
  const Param& y0 = *resolved.sace.y0;
  if (phi(net, y0.span()) < std::min(theta0, net.max_score()) - 1e-12) {
    throw Error(ErrorKind::StateOutsideSupport, "y0 has phi(y0) < theta0");
  }
  resolved.anchor = pack(theta0, *resolved.sace.sigma0);
  resolved.chain_start = y0;
  if (resolved.sace_family.s_max0 == 0.0) resolved.sace_family.s_max0 = derived_s_max(*resolved.sace.sigma0);

  const SaceOptions options{c.sace.q, c.sace.estimator, c.sace.weight_cap};
  RunResult out;
  const SaceKernel kernel{&net};
  const SaceField field{&net, options, &out.clip_events};
  const StepSchedule schedule(c.schedule.gamma0, c.schedule.beta);
  const auto family = make_family(resolved);
  const Anchor<SaceChain> anchor{SaceChain{y0, y0}, resolved.anchor};
  fill_result(out, run_stable_sa(stable_config(c), *family, kernel, field, schedule, anchor, rng),
              resolved.anchor);
  out.final_nu = nu_hat(packed_sigma(out.final_theta).span());
  out.config = std::move(resolved);
  return out;
}

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

void append_number(std::string& line, std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  line.append(buf, res.ptr);
}

void write_atomic(const fs::path& target, const std::string& content) {
  std::ostringstream tmp_name;
  tmp_name << target.filename().string() << ".tmp." << omp_get_thread_num();
  const fs::path tmp = target.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::IoError, "rename to " + target.string() + ": " + ec.message());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
bool parse_cell(const std::string& cell, T& value) {
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

}  // namespace

std::unique_ptr<CompactFamily> make_family(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::Quantile:
    case Experiment::Median:
      return std::make_unique<BoxFamily>(c.box_family.radius0, c.box_family.growth);
    case Experiment::Kohonen:
      return std::make_unique<SeparationFamily>(c.kohonen.count, c.kohonen.dim, c.kohonen.delta,
                                                c.separation_family.q0);
    case Experiment::Sace: {
      double s_max0 = c.sace_family.s_max0;
      if (s_max0 == 0.0) {
        if (!c.sace.sigma0) {
          throw Error(ErrorKind::InvalidArgument,
                      "family.s_max0 is derived from sigma0; use the resolved_config of summary.json");
        }
        s_max0 = derived_s_max(*c.sace.sigma0);
      }
      return std::make_unique<SaceFamily>(c.sace_family.theta_max0, s_max0, c.sace_family.growth);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown experiment");
}

RunResult execute(const RunConfig& config) {
  Rng rng(config.seed, streams::kMain);
  if (config.experiment == Experiment::Sace) return execute_sace(config, rng);
  return execute_param_chain(config, rng);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t dim) {
  std::string line = "n,I,zeta,restart";
  for (std::size_t k = 0; k < dim; ++k) {
    line += ",theta_";
    append_number(line, static_cast<std::uint64_t>(k));
  }
  line += '\n';
  os << line;
  for (const auto& r : trace) {
    line.clear();
    append_number(line, r.n);
    line += ',';
    append_number(line, r.trunc_count);
    line += ',';
    append_number(line, r.in_set_count);
    line += r.restart ? ",1" : ",0";
    for (double v : r.theta) {
      line += ',';
      append_number(line, v);
    }
    line += '\n';
    os << line;
  }
}

json summary_json(const RunResult& r) {
  json j;
  j["final_theta"] = r.final_theta.values();
  j["tail_mean"] = r.tail_mean.values();
  j["tail_samples"] = r.tail_samples;
  j["truncation_count"] = r.truncation_count;
  j["last_restart_n"] = r.last_restart_n;
  j["seed"] = r.config.seed;
  if (r.config.experiment == Experiment::Sace) {
    j["clip_events"] = r.clip_events;
    if (r.final_nu) j["final_nu"] = r.final_nu->values();
  }
  j["resolved_config"] = to_json(r.config);
  return j;
}

RunFiles run_experiment(const RunConfig& config, const fs::path& out_dir) {
  const RunResult result = execute(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  std::ostringstream trace;
  write_trace_csv(trace, result.trace, result.config.anchor.size());
  RunFiles files{out_dir / "trace.csv", out_dir / "summary.json"};
  write_atomic(files.trace, trace.str());
  write_atomic(files.summary, summary_json(result).dump(2) + "\n");
  return files;
}

CheckReport check_trace(std::istream& is, const CompactFamily* family) {
  CheckReport report;
  auto problem = [&report](std::size_t line_no, const std::string& what) {
    if (report.problems.size() < 50) {
      report.problems.push_back("line " + std::to_string(line_no) + ": " + what);
    }
  };

  std::string line;
  if (!std::getline(is, line)) {
    report.problems.push_back("empty trace");
    return report;
  }
  const auto header = split(line, ',');
  if (header.size() < 5 || header[0] != "n" || header[1] != "I" || header[2] != "zeta" ||
      header[3] != "restart") {
    report.problems.push_back("line 1: header must start with n,I,zeta,restart,theta_0");
    return report;
  }
  report.dim = header.size() - 4;
  for (std::size_t k = 0; k < report.dim; ++k) {
    if (header[4 + k] != "theta_" + std::to_string(k)) {
      problem(1, "expected column theta_" + std::to_string(k));
    }
  }

  std::uint64_t prev_n = 0;
  std::uint64_t prev_i = 0;
  std::uint64_t prev_zeta = 0;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto cells = split(line, ',');
    if (cells.size() != report.dim + 4) {
      problem(line_no, "expected " + std::to_string(report.dim + 4) + " columns");
      continue;
    }
    std::uint64_t n = 0;
    std::uint64_t i = 0;
    std::uint64_t zeta = 0;
    std::uint64_t restart = 0;
    if (!parse_cell(cells[0], n) || !parse_cell(cells[1], i) || !parse_cell(cells[2], zeta) ||
        !parse_cell(cells[3], restart) || restart > 1) {
      problem(line_no, "malformed bookkeeping columns");
      continue;
    }
    Param theta(report.dim);
    bool numeric = true;
    for (std::size_t k = 0; k < report.dim; ++k) numeric = numeric && parse_cell(cells[4 + k], theta[k]);
    if (!numeric || !theta.all_finite()) {
      problem(line_no, "theta is not a finite number");
      continue;
    }
    ++report.rows;

    if (n <= prev_n) problem(line_no, "n must increase");
    const std::uint64_t gap = n - prev_n;
    if (restart == 1) {
      if (zeta != 0) problem(line_no, "restart row must have zeta = 0");
      if (i != prev_i + 1) problem(line_no, "restart must raise I by exactly one");
      if (family != nullptr && i >= 1 && family->contains(i - 1, theta)) {
        problem(line_no, "restart row theta lies inside K_{I-1}");
      }
    } else {
      if (i != prev_i) problem(line_no, "I changed without a restart row");
      if (zeta != prev_zeta + gap) problem(line_no, "zeta must advance by the n increment");
      if (family != nullptr && !family->contains(i, theta)) problem(line_no, "theta outside K_I");
    }
    if (i > n) problem(line_no, "more truncations than iterations");
    prev_n = n;
    prev_i = i;
    prev_zeta = zeta;
  }
  if (report.rows == 0) report.problems.push_back("trace has no data rows");
  return report;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  if (dots == std::string::npos) {
    if (!parse_cell(text, first)) throw Error(ErrorKind::InvalidArgument, "bad seed '" + text + "'");
    return {first, first + 1};
  }
  if (!parse_cell(text.substr(0, dots), first) || !parse_cell(text.substr(dots + 2), last) ||
      last <= first) {
    throw Error(ErrorKind::InvalidArgument, "bad seed range '" + text + "', expected a..b with a < b");
  }
  return {first, last};
}

std::vector<SweepEntry> sweep(const json& doc, std::uint64_t first, std::uint64_t last,
                              const fs::path& out_root, int threads) {
  if (last <= first) throw Error(ErrorKind::InvalidArgument, "empty seed range");
  const auto count = static_cast<std::int64_t>(last - first);
  std::vector<SweepEntry> entries(static_cast<std::size_t>(count));
  if (threads <= 0) threads = omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t k = 0; k < count; ++k) {
    SweepEntry& e = entries[static_cast<std::size_t>(k)];
    e.seed = first + static_cast<std::uint64_t>(k);
    try {
      json seeded = doc;
      seeded["seed"] = e.seed;
      const fs::path dir = out_root / ("seed_" + std::to_string(e.seed));
      seeded["out_dir"] = dir.string();
      const RunConfig c = parse_config(seeded);
      run_experiment(c, dir);
      std::ifstream in(dir / "summary.json");
      e.summary = json::parse(in);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  }

  json all = json::array();
  for (const auto& e : entries) {
    json row{{"seed", e.seed}};
    if (e.summary) {
      row["tail_mean"] = (*e.summary)["tail_mean"];
      row["truncation_count"] = (*e.summary)["truncation_count"];
    } else {
      row["error"] = e.error;
    }
    all.push_back(row);
  }
  fs::create_directories(out_root);
  write_atomic(out_root / "sweep.json", all.dump(2) + "\n");
  return entries;
}

json load_config_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return doc;
}

RunConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed,
                      std::optional<std::string> out_dir) {
  json doc = load_config_json(path);
  if (seed) doc["seed"] = *seed;
  if (out_dir) doc["out_dir"] = *out_dir;
  return parse_config(doc);
}

}  // namespace salab
