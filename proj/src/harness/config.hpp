#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfg/solver.hpp"
#include "model/model.hpp"

namespace mfg::harness {

inline constexpr int kSchemaVersion = 1;

struct GaussianComponent {
  std::vector<double> center{0.5, 0.5};
  double width = 0.1;
  double weight = 1.0;
};

/// Initial measure: uniform | wrapped_gaussian | mixture.
struct MeasureSpec {
  std::string kind = "uniform";
  std::vector<double> center{0.5, 0.5};
  double width = 0.1;
  std::vector<GaussianComponent> components;
};

struct NumericsParams {
  int dim = 1;
  int M = 64;
  int S = 100;
  double T = 1.0;
  double tol = 1e-9;
  double theta = 0.5;
  int max_iters = 500;
  int dt_sde_refine = 1;
  int K = 3;
};

struct ExperimentParams {
  double t0 = 0.0;
  MeasureSpec m0;
  std::vector<int> N{2, 3, 4, 5};
  int n_mc = 200;
  std::uint64_t seed = 0;
  int samples = 5;
  int perturbations = 20;
  double amplitude = 0.05;
  double h_step = 0.1;
  int mc_samples = 10000;
};

struct OutputParams {
  std::string dir = "out";
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ModelParams model;
  NumericsParams numerics;
  ExperimentParams experiment;
  OutputParams output;
  int threads = 1;  // runtime only; not part of the hash
};

/// Parses a YAML document. Unknown keys, missing or wrong schema_version and
/// ill-typed values raise ConfigError. `env` entries MFGLAB_<SECTION>_<KEY>
/// override the document (values are parsed as YAML scalars or flow nodes).
ExperimentConfig parse_config(const std::string& yaml_text, const std::map<std::string, std::string>& env = {});
ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& env = {});
/// MFGLAB_* variables of the current process.
std::map<std::string, std::string> process_environment();

/// Canonical JSON of everything that determines results (output dir and
/// thread count excluded), with sorted keys.
nlohmann::json to_json(const ExperimentConfig& c);
/// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);
std::uint64_t fnv1a64(const std::string& bytes);

SolverConfig solver_config(const ExperimentConfig& c);
Measure build_measure(const MeasureSpec& spec, const Grid& g);

}  // namespace mfg::harness
