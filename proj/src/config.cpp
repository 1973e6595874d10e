#include "salab/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "salab/bridge.hpp"
#include "salab/fields.hpp"
#include "salab/rng.hpp"

namespace salab {

using nlohmann::json;

const char* to_string(Experiment e) noexcept {
  switch (e) {
    case Experiment::Quantile: return "quantile";
    case Experiment::Median: return "median";
    case Experiment::Kohonen: return "kohonen";
    case Experiment::Sace: return "sace";
  }
  return "unknown";
}

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw Error(ErrorKind::ValidationError, path + ": " + why);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown fields.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) invalid(path(key), "expected a number");
    const double out = v->get<double>();
    if (!std::isfinite(out)) invalid(path(key), "must be finite");
    return out;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
      invalid(path(key), "expected a nonnegative integer");
    }
    return v->get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) invalid(path(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<Param> vector(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) return std::nullopt;
    return to_param(*v, path(key));
  }

  static Param to_param(const json& v, const std::string& where) {
    if (v.is_number()) return Param{v.get<double>()};
    if (!v.is_array() || v.empty()) invalid(where, "expected a nonempty array of numbers");
    Param out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(where, "expected a nonempty array of numbers");
      out[i] = v[i].get<double>();
      if (!std::isfinite(out[i])) invalid(where, "entries must be finite");
    }
    return out;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.contains(it.key())) {
        throw Error(ErrorKind::UnknownField, join(path_, it.key()));
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json param_json(const Param& p) { return json(p.values()); }

Experiment parse_experiment(const std::string& name, const std::string& path) {
  if (name == "quantile") return Experiment::Quantile;
  if (name == "median") return Experiment::Median;
  if (name == "kohonen") return Experiment::Kohonen;
  if (name == "sace") return Experiment::Sace;
  invalid(path, "unknown experiment '" + name + "'");
}

}  // namespace

Distribution parse_distribution(const json& j, const std::string& path) {
  Reader r(j, path);
  const std::string type = r.text("type", "");
  Distribution out;
  if (type == "normal") {
    const auto mean = r.vector("mean");
    const double sd = r.number("sd", 1.0);
    if (!mean) invalid(r.path("mean"), "required");
    if (!(sd > 0.0)) invalid(r.path("sd"), "must be positive");
    out = Normal{*mean, sd};
  } else if (type == "mixture") {
    const json* comps = r.find("components");
    const auto weights = r.vector("weights");
    if (comps == nullptr || !comps->is_array() || comps->empty()) {
      invalid(r.path("components"), "required nonempty array");
    }
    std::vector<Normal> normals;
    for (std::size_t i = 0; i < comps->size(); ++i) {
      const std::string cpath = r.path("components") + "[" + std::to_string(i) + "]";
      Reader c((*comps)[i], cpath);
      const auto mean = c.vector("mean");
      const double sd = c.number("sd", 1.0);
      if (!mean) invalid(c.path("mean"), "required");
      if (!(sd > 0.0)) invalid(c.path("sd"), "must be positive");
      c.finish();
      normals.push_back(Normal{*mean, sd});
    }
    std::vector<double> w(normals.size(), 1.0);
    if (weights) {
      if (weights->size() != normals.size()) invalid(r.path("weights"), "one weight per component");
      w = weights->values();
    }
    try {
      out = make_mixture(std::move(w), std::move(normals));
    } catch (const Error& e) {
      invalid(path, e.what());
    }
  } else if (type == "uniform_box") {
    const auto lo = r.vector("lo");
    const auto hi = r.vector("hi");
    if (!lo || !hi || lo->size() != hi->size()) invalid(path, "lo and hi of equal length required");
    for (std::size_t k = 0; k < lo->size(); ++k) {
      if (!((*lo)[k] < (*hi)[k])) invalid(r.path("hi"), "must exceed lo componentwise");
    }
    out = UniformBox{*lo, *hi};
  } else if (type == "uniform_ball") {
    const auto dim = r.count("dim", 1);
    const double radius = r.number("radius", 1.0);
    if (dim == 0) invalid(r.path("dim"), "must be positive");
    if (!(radius > 0.0)) invalid(r.path("radius"), "must be positive");
    out = UniformBall{dim, radius};
  } else if (type == "point") {
    const auto value = r.vector("value");
    if (!value) invalid(r.path("value"), "required");
    out = PointMass{*value};
  } else {
    invalid(r.path("type"), "expected normal | mixture | uniform_box | uniform_ball | point");
  }
  r.finish();
  return out;
}

json to_json(const Distribution& dist) {
  if (const auto* d = std::get_if<Normal>(&dist)) {
    return {{"type", "normal"}, {"mean", param_json(d->mean)}, {"sd", d->sd}};
  }
  if (const auto* d = std::get_if<Mixture>(&dist)) {
    json comps = json::array();
    for (const auto& c : d->components) comps.push_back({{"mean", param_json(c.mean)}, {"sd", c.sd}});
    return {{"type", "mixture"}, {"weights", d->weights}, {"components", comps}};
  }
  if (const auto* d = std::get_if<UniformBox>(&dist)) {
    return {{"type", "uniform_box"}, {"lo", param_json(d->lo)}, {"hi", param_json(d->hi)}};
  }
  if (const auto* d = std::get_if<UniformBall>(&dist)) {
    return {{"type", "uniform_ball"}, {"dim", d->dim}, {"radius", d->radius}};
  }
  const auto& d = std::get<PointMass>(dist);
  return {{"type", "point"}, {"value", param_json(d.value)}};
}

namespace {

KernelSpec parse_kernel(const json& j, const std::string& path, const Distribution& fallback,
                        double ball_radius) {
  Reader r(j, path);
  const std::string type = r.text("type", "iid");
  KernelSpec out;
  if (type == "iid") {
    const json* d = r.find("distribution");
    out = IidKernel{d ? parse_distribution(*d, r.path("distribution")) : fallback};
  } else if (type == "ar1") {
    Ar1Kernel k;
    k.rho = r.number("rho", 0.5);
    k.sigma = r.number("sigma", 1.0);
    k.dim = r.count("dim", dimension(fallback));
    if (!(std::abs(k.rho) < 1.0)) invalid(r.path("rho"), "must satisfy |rho| < 1");
    if (!(k.sigma >= 0.0)) invalid(r.path("sigma"), "must be nonnegative");
    if (k.dim == 0) invalid(r.path("dim"), "must be positive");
    out = k;
  } else if (type == "rwm") {
    RwmKernel k;
    const json* d = r.find("distribution");
    k.target = d ? parse_distribution(*d, r.path("distribution")) : fallback;
    k.scale = r.number("scale", 0.1);
    k.radius = r.number("radius", ball_radius);
    if (!(k.scale > 0.0)) invalid(r.path("scale"), "must be positive");
    if (!(k.radius > 0.0)) invalid(r.path("radius"), "must be positive");
    out = k;
  } else {
    invalid(r.path("type"), "expected iid | ar1 | rwm");
  }
  r.finish();
  return out;
}

json kernel_to_json(const KernelSpec& k) {
  if (const auto* i = std::get_if<IidKernel>(&k)) {
    return {{"type", "iid"}, {"distribution", to_json(i->dist)}};
  }
  if (const auto* a = std::get_if<Ar1Kernel>(&k)) {
    return {{"type", "ar1"}, {"rho", a->rho}, {"sigma", a->sigma}, {"dim", a->dim}};
  }
  const auto& w = std::get<RwmKernel>(k);
  return {{"type", "rwm"},
          {"distribution", to_json(w.target)},
          {"scale", w.scale},
          {"radius", w.radius}};
}

Param default_kohonen_anchor(const KohonenConfig& k) {
  Param anchor(k.count * k.dim);
  for (std::size_t i = 0; i < k.count; ++i) {
    anchor[i * k.dim] = k.delta * (-0.5 + (static_cast<double>(i) + 0.5) / static_cast<double>(k.count));
  }
  return anchor;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  return parse_config(doc);
}

RunConfig parse_config(const json& doc) {
  Reader r(doc, "");
  RunConfig c;
  const json* exp = r.find("experiment");
  if (exp == nullptr || !exp->is_string()) invalid("experiment", "required string");
  c.experiment = parse_experiment(exp->get<std::string>(), "experiment");
  c.seed = r.count("seed", 0);
  c.budget = r.count("budget", c.budget);
  c.thin = r.count("thin", c.thin);
  c.max_truncations = r.count("max_truncations", c.max_truncations);
  c.out_dir = r.text("out_dir", c.out_dir);
  if (c.budget == 0) invalid("budget", "must be positive");
  if (c.thin == 0) invalid("thin", "must be positive");

  if (const json* s = r.find("schedule")) {
    Reader sr(*s, "schedule");
    c.schedule.gamma0 = sr.number("gamma0", c.schedule.gamma0);
    c.schedule.beta = sr.number("beta", c.schedule.beta);
    sr.finish();
  }
  if (!(c.schedule.gamma0 > 0.0)) invalid("schedule.gamma0", "must be positive");
  if (!(c.schedule.beta > 0.5 && c.schedule.beta <= 1.0)) {
    invalid("schedule.beta", "must lie in (0.5, 1]");
  }

  const json* family = r.find("family");
  const json* kernel = r.find("kernel");
  const auto anchor = r.vector("anchor");
  const auto chain_start = r.vector("chain_start");
  Rng pilot(c.seed, streams::kPilot);

  switch (c.experiment) {
    case Experiment::Quantile:
    case Experiment::Median: {
      std::size_t dim = 1;
      if (c.experiment == Experiment::Quantile) {
        c.quantile.q = r.number("q", c.quantile.q);
        c.quantile.phi = r.text("phi", c.quantile.phi);
        if (!(c.quantile.q > 0.0 && c.quantile.q < 1.0)) invalid("q", "must lie in (0, 1)");
        if (c.quantile.phi != "identity" && c.quantile.phi != "abs" && c.quantile.phi != "norm") {
          invalid("phi", "expected identity | abs | norm");
        }
      } else {
        dim = 2;
      }
      if (family != nullptr) {
        Reader fr(*family, "family");
        if (fr.text("type", "box") != "box") invalid("family.type", "expected box");
        c.box_family.radius0 = fr.number("radius0", c.box_family.radius0);
        c.box_family.growth = fr.number("growth", c.box_family.growth);
        fr.finish();
      }
      if (!(c.box_family.radius0 > 0.0)) invalid("family.radius0", "must be positive");
      if (!(c.box_family.growth > 1.0)) invalid("family.growth", "must exceed 1");

      const std::size_t data_dim = c.experiment == Experiment::Median && anchor ? anchor->size() : dim;
      const Distribution fallback = Normal{Param(data_dim), 1.0};
      c.kernel = kernel ? parse_kernel(*kernel, "kernel", fallback, 1.0)
                        : KernelSpec{IidKernel{fallback}};
      const std::size_t xdim = dimension(*c.kernel);
      if (c.experiment == Experiment::Quantile) {
        if (c.quantile.phi == "identity" && xdim != 1) {
          invalid("kernel", "phi = identity needs one-dimensional data");
        }
        c.anchor = anchor.value_or(Param{0.0});
        if (c.anchor.size() != 1) invalid("anchor", "quantile anchor is one number");
      } else {
        c.anchor = anchor.value_or(Param(xdim));
        if (c.anchor.size() != xdim) invalid("anchor", "dimension must match the data");
      }
      if (!BoxFamily(c.box_family.radius0, c.box_family.growth).contains(0, c.anchor)) {
        invalid("anchor", "must lie in K_0");
      }
      break;
    }
    case Experiment::Kohonen: {
      c.kohonen.count = r.count("count", c.kohonen.count);
      c.kohonen.dim = r.count("dim", c.kohonen.dim);
      c.kohonen.lambda = r.number("lambda", c.kohonen.lambda);
      c.kohonen.delta = r.number("delta", c.kohonen.delta);
      if (c.kohonen.count == 0) invalid("count", "must be positive");
      if (c.kohonen.dim == 0) invalid("dim", "must be positive");
      if (!(c.kohonen.lambda >= 0.0)) invalid("lambda", "must be nonnegative");
      if (!(c.kohonen.delta > 0.0)) invalid("delta", "must be positive");
      if (family != nullptr) {
        Reader fr(*family, "family");
        if (fr.text("type", "separation") != "separation") invalid("family.type", "expected separation");
        c.separation_family.q0 = fr.count("q0", 0);
        fr.finish();
      }
      const Distribution fallback = UniformBall{c.kohonen.dim, c.kohonen.delta};
      c.kernel = kernel ? parse_kernel(*kernel, "kernel", fallback, c.kohonen.delta)
                        : KernelSpec{IidKernel{fallback}};
      if (dimension(*c.kernel) != c.kohonen.dim) invalid("kernel", "data dimension must equal dim");
      c.anchor = anchor.value_or(default_kohonen_anchor(c.kohonen));
      if (c.anchor.size() != c.kohonen.count * c.kohonen.dim) {
        invalid("anchor", "needs count * dim coordinates");
      }
      const Dictionary dict(c.kohonen.count, c.kohonen.dim, c.anchor, c.kohonen.delta, 0.0);
      if (!dict.within_support()) invalid("anchor", "points must lie in ball(0, delta)");
      if (c.kohonen.count > 1 && !(dict.min_pairwise_distance() > kZeroTolerance)) {
        invalid("anchor", "points must be pairwise distinct");
      }
      if (c.separation_family.q0 == 0) c.separation_family.q0 = SeparationFamily::q0_for(dict);
      const SeparationFamily fam(c.kohonen.count, c.kohonen.dim, c.kohonen.delta,
                                 c.separation_family.q0);
      if (!fam.contains(0, c.anchor)) invalid("family.q0", "anchor must lie in K_0");
      break;
    }
    case Experiment::Sace: {
      if (kernel != nullptr) invalid("kernel", "SACE uses its own Gibbs/Beta kernel");
      if (chain_start) invalid("chain_start", "use y0 for SACE");
      if (anchor) invalid("anchor", "use theta0/sigma0 for SACE");
      c.sace.q = r.number("q", c.sace.q);
      if (!(c.sace.q > 0.0 && c.sace.q < 1.0)) invalid("q", "must lie in (0, 1)");
      if (c.schedule.gamma0 > 1.0) invalid("schedule.gamma0", "SACE needs gamma0 <= 1");
      const std::string est = r.text("estimator", "upper");
      if (est == "upper") {
        c.sace.estimator = SaceEstimator::Upper;
      } else if (est == "lower") {
        c.sace.estimator = SaceEstimator::Lower;
      } else {
        invalid("estimator", "expected upper | lower");
      }
      c.sace.weight_cap = r.number("weight_cap", c.sace.weight_cap);
      if (!(c.sace.weight_cap > 0.0)) invalid("weight_cap", "must be positive");
      c.sace.pilot_draws = r.count("pilot_draws", c.sace.pilot_draws);
      c.sace.pilot_accept = r.count("pilot_accept", c.sace.pilot_accept);
      if (c.sace.pilot_draws == 0 || c.sace.pilot_accept == 0) {
        invalid("pilot_draws", "pilot sizes must be positive");
      }
      if (const json* net = r.find("network")) {
        Reader nr(*net, "network");
        if (const auto w = nr.vector("weights")) c.sace.weights = w->values();
        if (const json* p = nr.find("paths")) {
          try {
            c.sace.paths = p->get<std::vector<std::vector<std::size_t>>>();
          } catch (const json::exception&) {
            invalid("network.paths", "expected an array of arrays of edge indices");
          }
        }
        nr.finish();
      }
      try {
        BridgeNetwork(c.sace.weights, c.sace.paths);
      } catch (const Error& e) {
        invalid("network", e.what());
      }
      const std::size_t d = c.sace.weights.size();
      if (const json* t = r.find("theta0")) {
        if (!t->is_number()) invalid("theta0", "expected a number");
        c.sace.theta0 = t->get<double>();
      }
      c.sace.sigma0 = r.vector("sigma0");
      c.sace.y0 = r.vector("y0");
      if (c.sace.sigma0) {
        if (c.sace.sigma0->size() != d) invalid("sigma0", "one entry per edge");
        for (double v : *c.sace.sigma0) {
          if (!(v < 0.0)) invalid("sigma0", "entries must be negative");
        }
      }
      if (c.sace.y0) {
        if (c.sace.y0->size() != d) invalid("y0", "one entry per edge");
        for (double v : *c.sace.y0) {
          if (!(v > 0.0 && v <= 1.0)) invalid("y0", "entries must lie in (0, 1]");
        }
      }
      if (family != nullptr) {
        Reader fr(*family, "family");
        if (fr.text("type", "sace") != "sace") invalid("family.type", "expected sace");
        c.sace_family.theta_max0 = fr.number("theta_max0", 0.0);
        c.sace_family.s_max0 = fr.number("s_max0", c.sace_family.s_max0);
        c.sace_family.growth = fr.number("growth", c.sace_family.growth);
        fr.finish();
      }
      if (c.sace_family.theta_max0 == 0.0) {
        c.sace_family.theta_max0 = BridgeNetwork(c.sace.weights, c.sace.paths).max_score();
      }
      if (!(c.sace_family.theta_max0 > 0.0)) invalid("family.theta_max0", "must be positive");
      if (!(c.sace_family.s_max0 == 0.0 || c.sace_family.s_max0 > 1.0)) {
        invalid("family.s_max0", "must be 0 (derived) or exceed 1");
      }
      if (!(c.sace_family.growth > 1.0)) invalid("family.growth", "must exceed 1");
      break;
    }
  }

  if (c.kernel) {
    c.kernel_json = kernel_to_json(*c.kernel);
    const std::size_t xdim = dimension(*c.kernel);
    if (chain_start) {
      c.chain_start = *chain_start;
    } else if (std::holds_alternative<Ar1Kernel>(*c.kernel)) {
      c.chain_start = Param(xdim);
    } else {
      const auto& dist = std::holds_alternative<IidKernel>(*c.kernel)
                             ? std::get<IidKernel>(*c.kernel).dist
                             : std::get<RwmKernel>(*c.kernel).target;
      c.chain_start = sample(dist, pilot);
    }
    if (c.chain_start.size() != xdim) invalid("chain_start", "dimension must match the kernel");
    if (const auto* rwm = std::get_if<RwmKernel>(&*c.kernel)) {
      if (density(rwm->target, c.chain_start) <= 0.0 ||
          norm(c.chain_start) > rwm->radius) {
        invalid("chain_start", "must lie in the support of the RWM target");
      }
    }
  }
  r.finish();
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["budget"] = c.budget;
  j["thin"] = c.thin;
  j["max_truncations"] = c.max_truncations;
  j["out_dir"] = c.out_dir;
  j["schedule"] = {{"gamma0", c.schedule.gamma0}, {"beta", c.schedule.beta}};
  switch (c.experiment) {
    case Experiment::Quantile:
    case Experiment::Median:
      if (c.experiment == Experiment::Quantile) {
        j["q"] = c.quantile.q;
        j["phi"] = c.quantile.phi;
      }
      j["family"] = {{"type", "box"}, {"radius0", c.box_family.radius0}, {"growth", c.box_family.growth}};
      break;
    case Experiment::Kohonen:
      j["count"] = c.kohonen.count;
      j["dim"] = c.kohonen.dim;
      j["lambda"] = c.kohonen.lambda;
      j["delta"] = c.kohonen.delta;
      j["family"] = {{"type", "separation"}, {"q0", c.separation_family.q0}};
      break;
    case Experiment::Sace:
      j["q"] = c.sace.q;
      j["estimator"] = c.sace.estimator == SaceEstimator::Upper ? "upper" : "lower";
      j["weight_cap"] = c.sace.weight_cap;
      j["pilot_draws"] = c.sace.pilot_draws;
      j["pilot_accept"] = c.sace.pilot_accept;
      j["network"] = {{"weights", c.sace.weights}, {"paths", c.sace.paths}};
      j["family"] = {{"type", "sace"},
                     {"theta_max0", c.sace_family.theta_max0},
                     {"s_max0", c.sace_family.s_max0},
                     {"growth", c.sace_family.growth}};
      if (c.sace.theta0) j["theta0"] = *c.sace.theta0;
      if (c.sace.sigma0) j["sigma0"] = param_json(*c.sace.sigma0);
      if (c.sace.y0) j["y0"] = param_json(*c.sace.y0);
      break;
  }
  if (c.experiment != Experiment::Sace) {
    j["kernel"] = c.kernel_json;
    j["anchor"] = param_json(c.anchor);
    j["chain_start"] = param_json(c.chain_start);
  }
  return j;
}

}  // namespace salab
