#include "harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"

extern char** environ;

namespace mfg::harness {

namespace {

const std::set<std::string> kSections{"model", "numerics", "experiment", "output"};

template <class T>
T as(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + where);
  }
}

void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  if (!n.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

std::vector<double> as_vec(const YAML::Node& n, const std::string& where) {
  if (n.IsScalar()) return {as<double>(n, where)};
  if (!n.IsSequence()) throw ConfigError(where + " must be a number or a list");
  std::vector<double> v;
  for (const auto& e : n) v.push_back(as<double>(e, where));
  return v;
}

MeasureSpec parse_measure(const YAML::Node& n) {
  MeasureSpec m;
  if (n.IsScalar()) {
    m.kind = n.as<std::string>();
  } else {
    check_keys(n, {"kind", "center", "width", "components"}, "experiment.m0");
    if (n["kind"]) m.kind = as<std::string>(n["kind"], "experiment.m0.kind");
    if (n["center"]) m.center = as_vec(n["center"], "experiment.m0.center");
    if (n["width"]) m.width = as<double>(n["width"], "experiment.m0.width");
    if (n["components"]) {
      if (!n["components"].IsSequence()) throw ConfigError("experiment.m0.components must be a list");
      for (const auto& c : n["components"]) {
        check_keys(c, {"center", "width", "weight"}, "experiment.m0.components");
        GaussianComponent g;
        if (c["center"]) g.center = as_vec(c["center"], "component center");
        if (c["width"]) g.width = as<double>(c["width"], "component width");
        if (c["weight"]) g.weight = as<double>(c["weight"], "component weight");
        m.components.push_back(g);
      }
    }
  }
  if (m.kind != "uniform" && m.kind != "wrapped_gaussian" && m.kind != "mixture")
    throw ConfigError("experiment.m0.kind must be uniform, wrapped_gaussian or mixture");
  if (m.kind == "mixture" && m.components.empty()) throw ConfigError("mixture m0 needs components");
  if (m.center.size() == 1) m.center.push_back(0.5);
  for (auto& c : m.components)
    if (c.center.size() == 1) c.center.push_back(0.5);
  return m;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

const std::map<std::string, std::set<std::string>> kSectionKeys{
    {"model", {"hamiltonian", "eps", "radius", "h_constant", "coupling", "sigma", "sigma_g", "kappa", "kappa_g", "beta"}},
    {"numerics", {"dim", "M", "S", "T", "tol", "theta", "max_iters", "dt_sde_refine", "K"}},
    {"experiment",
     {"t0", "m0", "N", "n_mc", "seed", "samples", "perturbations", "amplitude", "h_step", "mc_samples"}},
    {"output", {"dir"}}};

// Environment keys are case-insensitive; they resolve to the schema spelling.
void apply_env(YAML::Node& root, const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind("MFGLAB_", 0) != 0) continue;
    const std::string rest = name.substr(7);
    const auto us = rest.find('_');
    if (us == std::string::npos) continue;
    const std::string section = lower(rest.substr(0, us));
    if (!kSections.count(section)) continue;  // e.g. MFGLAB_LOG
    std::string key = lower(rest.substr(us + 1));
    for (const auto& known : kSectionKeys.at(section))
      if (lower(known) == key) key = known;
    YAML::Node parsed;
    try {
      parsed = YAML::Load(value);
    } catch (const YAML::Exception&) {
      throw ConfigError("cannot parse override " + name);
    }
    if (!root[section]) root[section] = YAML::Node(YAML::NodeType::Map);
    root[section][key] = parsed;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text, const std::map<std::string, std::string>& env) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  apply_env(root, env);
  check_keys(root, {"schema_version", "model", "numerics", "experiment", "output"}, "configuration");
  if (!root["schema_version"]) throw ConfigError("schema_version is required");
  ExperimentConfig c;
  c.schema_version = as<int>(root["schema_version"], "schema_version");
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));

  if (const YAML::Node m = root["model"]) {
    check_keys(m, kSectionKeys.at("model"), "model");
    ModelParams& p = c.model;
    if (m["hamiltonian"]) p.hamiltonian = as<std::string>(m["hamiltonian"], "model.hamiltonian");
    if (m["eps"]) p.eps = as<double>(m["eps"], "model.eps");
    if (m["radius"]) p.radius = as<double>(m["radius"], "model.radius");
    if (m["h_constant"]) p.h_constant = as<double>(m["h_constant"], "model.h_constant");
    if (m["coupling"]) p.coupling = as<std::string>(m["coupling"], "model.coupling");
    if (m["sigma"]) p.sigma = as<double>(m["sigma"], "model.sigma");
    if (m["sigma_g"]) p.sigma_g = as<double>(m["sigma_g"], "model.sigma_g");
    if (m["kappa"]) p.kappa = as<double>(m["kappa"], "model.kappa");
    if (m["kappa_g"]) p.kappa_g = as<double>(m["kappa_g"], "model.kappa_g");
    if (m["beta"]) p.beta = as<double>(m["beta"], "model.beta");
  }
  if (const YAML::Node n = root["numerics"]) {
    check_keys(n, kSectionKeys.at("numerics"), "numerics");
    NumericsParams& p = c.numerics;
    if (n["dim"]) p.dim = as<int>(n["dim"], "numerics.dim");
    if (n["M"]) p.M = as<int>(n["M"], "numerics.M");
    if (n["S"]) p.S = as<int>(n["S"], "numerics.S");
    if (n["T"]) p.T = as<double>(n["T"], "numerics.T");
    if (n["tol"]) p.tol = as<double>(n["tol"], "numerics.tol");
    if (n["theta"]) p.theta = as<double>(n["theta"], "numerics.theta");
    if (n["max_iters"]) p.max_iters = as<int>(n["max_iters"], "numerics.max_iters");
    if (n["dt_sde_refine"]) p.dt_sde_refine = as<int>(n["dt_sde_refine"], "numerics.dt_sde_refine");
    if (n["K"]) p.K = as<int>(n["K"], "numerics.K");
  }
  if (const YAML::Node e = root["experiment"]) {
    check_keys(e, kSectionKeys.at("experiment"), "experiment");
    ExperimentParams& p = c.experiment;
    if (e["t0"]) p.t0 = as<double>(e["t0"], "experiment.t0");
    if (e["m0"]) p.m0 = parse_measure(e["m0"]);
    if (e["N"]) {
      p.N.clear();
      if (e["N"].IsScalar()) {
        p.N.push_back(as<int>(e["N"], "experiment.N"));
      } else {
        for (const auto& v : e["N"]) p.N.push_back(as<int>(v, "experiment.N"));
      }
    }
    if (e["n_mc"]) p.n_mc = as<int>(e["n_mc"], "experiment.n_mc");
    if (e["seed"]) p.seed = as<std::uint64_t>(e["seed"], "experiment.seed");
    if (e["samples"]) p.samples = as<int>(e["samples"], "experiment.samples");
    if (e["perturbations"]) p.perturbations = as<int>(e["perturbations"], "experiment.perturbations");
    if (e["amplitude"]) p.amplitude = as<double>(e["amplitude"], "experiment.amplitude");
    if (e["h_step"]) p.h_step = as<double>(e["h_step"], "experiment.h_step");
    if (e["mc_samples"]) p.mc_samples = as<int>(e["mc_samples"], "experiment.mc_samples");
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, kSectionKeys.at("output"), "output");
    if (o["dir"]) c.output.dir = as<std::string>(o["dir"], "output.dir");
  }

  // Value checks that do not need a model.
  const auto& n = c.numerics;
  if (n.dim != 1 && n.dim != 2) throw ConfigError("numerics.dim must be 1 or 2");
  if (n.M < 8) throw ConfigError("numerics.M must be at least 8");
  if (n.S < 4) throw ConfigError("numerics.S must be at least 4");
  if (!(n.T > 0)) throw ConfigError("numerics.T must be positive");
  if (!(n.tol > 0)) throw ConfigError("numerics.tol must be positive");
  if (!(n.theta > 0 && n.theta <= 1)) throw ConfigError("numerics.theta must lie in (0, 1]");
  if (n.max_iters < 1) throw ConfigError("numerics.max_iters must be positive");
  if (n.dt_sde_refine < 1) throw ConfigError("numerics.dt_sde_refine must be at least 1");
  if (n.K < 1) throw ConfigError("numerics.K must be at least 1");
  if (c.model.beta < 0) throw ConfigError("model.beta must be nonnegative");
  if (c.experiment.N.empty()) throw ConfigError("experiment.N must not be empty");
  for (int v : c.experiment.N)
    if (v < 1) throw ConfigError("experiment.N entries must be positive");
  if (c.experiment.n_mc < 2) throw ConfigError("experiment.n_mc must be at least 2");
  if (c.experiment.samples < 1) throw ConfigError("experiment.samples must be positive");
  if (c.experiment.mc_samples < 2) throw ConfigError("experiment.mc_samples must be at least 2");
  try {
    parse_hamiltonian(c.model.hamiltonian);
    if (c.model.coupling != "zero") parse_profile(c.model.coupling);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), env);
}

std::map<std::string, std::string> process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = kv.substr(0, eq);
    if (name.rfind("MFGLAB_", 0) == 0) env[name] = kv.substr(eq + 1);
  }
  return env;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["schema_version"] = c.schema_version;
  const ModelParams& m = c.model;
  j["model"] = {{"hamiltonian", m.hamiltonian}, {"eps", m.eps},         {"radius", m.radius},
                {"h_constant", m.h_constant},   {"coupling", m.coupling}, {"sigma", m.sigma},
                {"sigma_g", m.sigma_g},         {"kappa", m.kappa},       {"kappa_g", m.kappa_g},
                {"beta", m.beta}};
  const NumericsParams& n = c.numerics;
  j["numerics"] = {{"dim", n.dim},     {"M", n.M},         {"S", n.S},
                   {"T", n.T},         {"tol", n.tol},     {"theta", n.theta},
                   {"max_iters", n.max_iters}, {"dt_sde_refine", n.dt_sde_refine}, {"K", n.K}};
  const ExperimentParams& e = c.experiment;
  json m0 = {{"kind", e.m0.kind}, {"center", e.m0.center}, {"width", e.m0.width}};
  json comps = json::array();
  for (const auto& g : e.m0.components) comps.push_back({{"center", g.center}, {"width", g.width}, {"weight", g.weight}});
  m0["components"] = comps;
  j["experiment"] = {{"t0", e.t0},
                     {"m0", m0},
                     {"N", e.N},
                     {"n_mc", e.n_mc},
                     {"seed", e.seed},
                     {"samples", e.samples},
                     {"perturbations", e.perturbations},
                     {"amplitude", e.amplitude},
                     {"h_step", e.h_step},
                     {"mc_samples", e.mc_samples}};
  return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

SolverConfig solver_config(const ExperimentConfig& c) {
  SolverConfig s;
  s.grid = Grid(c.numerics.dim, c.numerics.M);
  s.T = c.numerics.T;
  s.steps = c.numerics.S;
  s.theta = c.numerics.theta;
  s.tol = c.numerics.tol;
  s.max_iters = c.numerics.max_iters;
  s.threads = c.threads;
  return s;
}

Measure build_measure(const MeasureSpec& spec, const Grid& g) {
  if (spec.kind == "uniform") return Measure::uniform(g);
  if (spec.kind == "wrapped_gaussian") return Measure::wrapped_gaussian(g, {spec.center[0], spec.center[1]}, spec.width);
  Field f(g, 0.0);
  for (const auto& c : spec.components) {
    if (!(c.weight >= 0)) throw ConfigError("mixture weights must be nonnegative");
    f.axpy(c.weight, Measure::wrapped_gaussian(g, {c.center[0], c.center[1]}, c.width).density());
  }
  return Measure(std::move(f));
}

}  // namespace mfg::harness
