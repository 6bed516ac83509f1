#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "harness/config.hpp"
#include "master/master.hpp"

namespace mfg::harness {

inline const std::vector<std::string> kSubcommands{"solve-mfg", "kernel",   "residual", "flow",  "nash",
                                                   "converge",  "project",  "chaos",    "tree",  "potential"};

struct RunOutcome {
  std::string subcommand;
  std::string config_hash;
  std::vector<std::string> artifacts;  // file names relative to the output dir
  nlohmann::json summary;
  double runtime_seconds = 0.0;
};

/// Runs one subcommand and writes its artifacts, a manifest.json and a
/// timing.json into `out_dir`. On failure a manifest with status "error"
/// (plus gap_log.csv for non-convergence) is written before the exception
/// propagates.
RunOutcome run(const std::string& subcommand, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Sample design of the master-equation residual: n points (t, x, m) on the
/// grid of `cfg`, times inside (0, T) on every grid refined by powers of 2.
std::vector<MasterSample> residual_samples(int n, const SolverConfig& cfg);

/// Base and doubled-resolution residual reports for the same sample design.
struct ResidualRefinement {
  MasterResidualReport base, refined;
  double ratio() const { return refined.max_abs > 0 ? base.max_abs / refined.max_abs : 0.0; }
};
ResidualRefinement residual_refinement(const Model& base_model, const ModelParams& params, const SolverConfig& cfg,
                                       int n_samples);

/// Flow gaps at steps S, 2S, 4S. The re-basing step is rounded to a multiple
/// of the coarsest dt (at least one step).
struct FlowRow {
  int S = 0;
  double dt = 0.0;
  double gap = 0.0;
  double bound = 0.0;  // 10 tol + dt
  double h_step = 0.0;
};
std::vector<FlowRow> flow_sweep(double t0, const MeasureSpec& m0, double h_step, const ModelParams& params,
                                const SolverConfig& cfg);

/// Projection residual of the master field in the Nash system at time t, for
/// each N over `n_tuples` random node tuples (drawn per N from `seed`).
struct ProjectionRow {
  int N = 0;
  double raw = 0.0;
  double remainder = 0.0;
};
std::vector<ProjectionRow> projection_sweep(const std::vector<int>& Ns, double t, const Model& model,
                                            const SolverConfig& cfg, int n_tuples, std::uint64_t seed);

}  // namespace mfg::harness
