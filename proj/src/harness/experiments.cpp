#include "harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rates.hpp"
#include "master/potential.hpp"
#include "mfg/kernel.hpp"
#include "nash/nash.hpp"
#include "noise/tree.hpp"
#include "particle/particle.hpp"
#include "torus/snapshot.hpp"

namespace mfg::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV with a leading config-hash comment and a header row.
class Csv {
 public:
  Csv(const fs::path& path, const std::string& hash, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    out_ << "# config_hash=" << hash << '\n';
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  ~Csv() { out_.flush(); }

 private:
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

struct Ctx {
  const ExperimentConfig& cfg;
  fs::path dir;
  std::string hash;
  RunOutcome& out;
  Model model;
  SolverConfig solver;
  Measure m0;

  fs::path file(const std::string& name) {
    out.artifacts.push_back(name);
    return dir / name;
  }
};

void slope_csv(Ctx& c, const std::string& name, const std::vector<std::pair<std::string, SlopeFit>>& fits) {
  Csv csv(c.file(name), c.hash, {"quantity", "slope", "stderr", "intercept", "marker"});
  for (const auto& [q, f] : fits) csv.row({q, num(f.slope), num(f.stderr_), num(f.intercept), f.marker()});
}

json slope_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"stderr", f.stderr_}, {"intercept", f.intercept}, {"marker", f.marker()}};
}

void run_solve_mfg(Ctx& c) {
  const MfgSolution sol = solve_mfg(c.cfg.experiment.t0, c.m0, c.model, c.solver);
  write_field_csv(c.file("u_t0.csv").string(), sol.u.front(), c.hash);
  write_field_csv(c.file("m_T.csv").string(), sol.m.back().density(), c.hash);
  {
    Csv csv(c.file("gaps.csv"), c.hash, {"iteration", "gap"});
    for (std::size_t k = 0; k < sol.gap_history.size(); ++k) csv.row({std::to_string(k + 1), num(sol.gap_history[k])});
  }
  write_snapshots(c.file("u_path.bin").string(), sol.u);
  std::vector<Field> m;
  for (const auto& s : sol.m) m.push_back(s.density());
  write_snapshots(c.file("m_path.bin").string(), m);
  c.out.summary = {{"iterations", sol.iterations},
                   {"final_gap", sol.final_gap()},
                   {"clipped_mass", sol.clipped_mass},
                   {"sup_u_t0", sol.u.front().sup_norm()}};
}

void run_kernel(Ctx& c) {
  const DerivativeKernel K = derivative_kernel(c.cfg.experiment.t0, c.m0, c.model, c.solver);
  const std::size_t n = K.n();
  if (n * n <= (std::size_t(1) << 22)) {
    Csv csv(c.file("kernel.csv"), c.hash, {"x", "y", "value"});
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) csv.row({std::to_string(x), std::to_string(y), num(K.at(x, y))});
  }
  c.out.summary = {{"normalization_error", K.normalization_error()}, {"nodes", n}};
}

void run_residual(Ctx& c) {
  const ResidualRefinement r = residual_refinement(c.model, c.cfg.model, c.solver, c.cfg.experiment.samples);
  Csv csv(c.file("residual.csv"), c.hash,
          {"M", "S", "sample", "t", "x", "node", "dtU", "lapU", "hamiltonian", "div_term", "transport", "coupling",
           "residual"});
  for (const auto* rep : {&r.base, &r.refined})
    for (std::size_t k = 0; k < rep->samples.size(); ++k) {
      const auto& s = rep->samples[k];
      csv.row({std::to_string(rep->M), std::to_string(rep->S), std::to_string(k), num(s.t), num(s.x[0]),
               std::to_string(s.node), num(s.dtU), num(s.lapU), num(s.hamiltonian), num(s.div_term),
               num(s.transport), num(s.coupling), num(s.residual)});
    }
  c.out.summary = {{"max_abs_base", r.base.max_abs},
                   {"max_abs_refined", r.refined.max_abs},
                   {"mean_abs_base", r.base.mean_abs},
                   {"mean_abs_refined", r.refined.mean_abs},
                   {"ratio", r.ratio()}};
}

void run_flow(Ctx& c) {
  const auto rows = flow_sweep(c.cfg.experiment.t0, c.cfg.experiment.m0, c.cfg.experiment.h_step, c.cfg.model, c.solver);
  Csv csv(c.file("flow.csv"), c.hash, {"S", "dt", "h_step", "gap", "bound"});
  json arr = json::array();
  for (const auto& r : rows) {
    csv.row({std::to_string(r.S), num(r.dt), num(r.h_step), num(r.gap), num(r.bound)});
    arr.push_back({{"S", r.S}, {"gap", r.gap}});
  }
  c.out.summary = {{"rows", arr}};
}

void run_nash(Ctx& c) {
  const int N = c.cfg.experiment.N.front();
  const NashTensor t = solve_nash(N, c.model, c.solver);
  write_nash_snapshot(c.file("nash_v.bin").string(), t);
  double terminal = 0.0;
  std::vector<int> k(static_cast<std::size_t>(N));
  for (std::size_t n = 0; n < t.index.size(); ++n) {
    t.index.unflat(n, k);
    for (int i = 0; i < N; ++i) {
      std::vector<std::size_t> atoms;
      for (int j = 0; j < N; ++j)
        if (j != i) atoms.push_back(std::size_t(k[std::size_t(j)]));
      terminal = std::max(terminal, std::abs(t.vT[std::size_t(i)][n] -
                                             c.model.G.at_empirical(std::size_t(k[std::size_t(i)]), atoms)));
    }
  }
  const NashMasterError e = nash_vs_master_error(t, c.model, c.solver);
  const double exch = exchangeability_defect(t, 4, c.cfg.experiment.seed);
  {
    Csv csv(c.file("nash.csv"), c.hash,
            {"N", "M", "exchangeability_defect", "terminal_error", "max_error", "mean_error", "max_error_excluded"});
    csv.row({std::to_string(N), std::to_string(c.solver.grid.points()), num(exch), num(terminal), num(e.max_error),
             num(e.mean_error), num(e.max_error_excluded)});
  }
  c.out.summary = {{"N", N},
                   {"exchangeability_defect", exch},
                   {"terminal_error", terminal},
                   {"max_error", e.max_error},
                   {"mean_error", e.mean_error}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run_converge(Ctx& c, json& timing) {
  std::vector<double> Ns, errs;
  Csv csv(c.file("converge.csv"), c.hash, {"N", "error", "mean_error", "error_excluded", "stderr"});
  for (int N : c.cfg.experiment.N) {
    const auto t0 = std::chrono::steady_clock::now();
    const NashTensor t = solve_nash(N, c.model, c.solver);
    const NashMasterError e = nash_vs_master_error(t, c.model, c.solver);
    timing["converge_N" + std::to_string(N)] = seconds_since(t0);
    csv.row({std::to_string(N), num(e.max_error), num(e.mean_error), num(e.max_error_excluded), num(0.0)});
    Ns.push_back(N);
    errs.push_back(e.max_error);
  }
  const SlopeFit fit = fit_slope(Ns, errs);
  slope_csv(c, "converge_slope.csv", {{"max_error", fit}});
  c.out.summary = {{"slope", slope_json(fit)}, {"errors", errs}};
}

void run_project(Ctx& c) {
  const TimeGrid tg = c.solver.timegrid(c.cfg.experiment.t0);
  const double t_mid = tg.time(tg.steps / 2);
  const auto res = projection_sweep(c.cfg.experiment.N, t_mid, c.model, c.solver, c.cfg.experiment.samples,
                                    c.cfg.experiment.seed);
  std::vector<double> rN, rem;
  {
    Csv csv(c.file("projection_residual.csv"), c.hash, {"N", "t", "raw_max", "remainder_max"});
    for (const auto& r : res) {
      csv.row({std::to_string(r.N), num(t_mid), num(r.raw), num(r.remainder)});
      rN.push_back(r.N);
      rem.push_back(r.remainder);
    }
  }
  std::vector<double> Ns, dist;
  Csv csv(c.file("project.csv"), c.hash, {"N", "l1_distance", "error_bar", "mc_samples"});
  for (int N : c.cfg.experiment.N) {
    if (std::pow(double(c.solver.grid.points()), N) > double(kNashBudget)) {
      log::warn("project: skipping averaged projection for N=" + std::to_string(N) + " (tensor budget)");
      continue;
    }
    const NashTensor t = solve_nash(N, c.model, c.solver);
    const AveragedProjection w = averaged_projection_w(t, 0, c.m0, c.model, c.solver, c.cfg.experiment.mc_samples,
                                                       c.cfg.experiment.seed);
    csv.row({std::to_string(N), num(w.l1_distance), num(w.error_bar), std::to_string(c.cfg.experiment.mc_samples)});
    Ns.push_back(N);
    dist.push_back(w.l1_distance);
  }
  const SlopeFit fit = fit_slope(Ns, dist);
  const SlopeFit rfit = fit_slope(rN, rem);
  slope_csv(c, "project_slope.csv", {{"l1_distance", fit}, {"residual_remainder", rfit}});
  c.out.summary = {{"slope", slope_json(fit)},
                   {"distances", dist},
                   {"residual_slope", slope_json(rfit)},
                   {"residual_remainders", rem}};
}

void run_chaos(Ctx& c) {
  const MfgSolution sol = solve_mfg(c.cfg.experiment.t0, c.m0, c.model, c.solver);
  ParticleConfig pc;
  pc.n_mc = c.cfg.experiment.n_mc;
  pc.seed = c.cfg.experiment.seed;
  pc.dt_refine = c.cfg.numerics.dt_sde_refine;
  pc.threads = c.solver.threads;
  const ChaosReport rep = chaos_sweep(c.cfg.experiment.N, sol, c.model, c.solver, pc);
  Csv csv(c.file("chaos.csv"), c.hash, {"N", "estimate", "stderr", "law_gap", "law_gap_stderr", "dt_sde", "n_mc"});
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv.row({std::to_string(r.N), num(r.gap), num(r.gap_stderr), num(r.law_gap), num(r.law_gap_stderr),
             num(r.dt_sde), std::to_string(r.n_mc)});
    rows.push_back({{"N", r.N}, {"estimate", r.gap}, {"stderr", r.gap_stderr}});
  }
  slope_csv(c, "chaos_slope.csv", {{"estimate", rep.gap_slope}, {"law_gap", rep.law_slope}});
  c.out.summary = {{"rows", rows}, {"slope", slope_json(rep.gap_slope)}, {"law_slope", slope_json(rep.law_slope)}};
}

void run_tree(Ctx& c) {
  const int K = c.cfg.numerics.K;
  const double t0 = c.cfg.experiment.t0;
  Csv csv(c.file("tree.csv"), c.hash, {"K", "node", "level", "time", "shift", "gap"});
  json summary;
  Field root_prev;
  for (int k : {K, K + 1}) {
    if (c.solver.timegrid(t0).steps % k != 0) continue;
    const TreeSolution tree = solve_tree(t0, c.m0, c.model, c.solver, k);
    const auto gaps = master_consistency(tree, c.model, c.solver);
    double worst = 0.0;
    for (const auto& g : gaps) {
      csv.row({std::to_string(k), std::to_string(g.node), std::to_string(g.level), num(g.time),
               num(tree.nodes[std::size_t(g.node)].shift), num(g.gap)});
      worst = std::max(worst, g.gap);
    }
    const std::string key = "K" + std::to_string(k);
    summary[key] = {{"max_gap", worst}, {"iterations", tree.iterations}};
    if (k == K) {
      write_tree(c.dir, "tree", tree, c.hash);
      for (const char* f : {"tree.json", "tree_u.bin", "tree_m.bin"}) c.out.artifacts.push_back(f);
      root_prev = tree.root_u();
      if (c.model.beta == 0.0) {
        const MfgSolution sol = solve_mfg(t0, c.m0, c.model, c.solver);
        summary["deterministic_gap"] = sup_distance(sol.u.front(), tree.root_u());
      }
    } else {
      summary["root_refinement_gap"] = sup_distance(root_prev, tree.root_u());
    }
  }
  c.out.summary = summary;
}

void run_potential(Ctx& c) {
  const auto& e = c.cfg.experiment;
  const OptimalityReport rep = optimality_check(e.t0, c.m0, c.model, c.solver, e.perturbations, e.amplitude, e.seed);
  const MfgSolution sol = solve_mfg(e.t0, c.m0, c.model, c.solver);
  Csv csv(c.file("potential.csv"), c.hash, {"perturbation", "gap", "gap_doubled", "ratio"});
  for (std::size_t k = 0; k < rep.gaps.size(); ++k)
    csv.row({std::to_string(k), num(rep.gaps[k]), num(rep.gaps_doubled[k]),
             num(rep.gaps[k] != 0 ? rep.gaps_doubled[k] / rep.gaps[k] : 0.0)});
  c.out.summary = {{"base_cost", rep.base_cost},
                   {"duality_value", duality_value(sol, c.model)},
                   {"min_gap", rep.min_gap},
                   {"min_ratio", rep.min_ratio},
                   {"max_ratio", rep.max_ratio}};
}

}  // namespace

std::vector<MasterSample> residual_samples(int n, const SolverConfig& cfg) {
  static const double tfrac[] = {0.25, 0.5, 0.625, 0.75, 0.875};
  static const double xs[] = {0.0, 0.25, 0.5, 0.625, 0.8125};
  std::vector<MasterSample> out;
  const double dt = cfg.dt();
  for (int k = 0; k < n; ++k) {
    const double t = std::round(tfrac[k % 5] * cfg.steps) * dt;
    double cx = 0.3 + 0.1 * k;
    cx -= std::floor(cx);
    const Vec center{cx, cfg.grid.dim() == 2 ? 0.5 : 0.0};
    const Vec x{xs[k % 5], cfg.grid.dim() == 2 ? xs[(k + 2) % 5] : 0.0};
    out.push_back({t, x, Measure::wrapped_gaussian(cfg.grid, center, 0.1)});
  }
  return out;
}

ResidualRefinement residual_refinement(const Model& base_model, const ModelParams& params, const SolverConfig& cfg,
                                       int n_samples) {
  ResidualRefinement r;
  r.base = master_residual(residual_samples(n_samples, cfg), base_model, cfg);
  SolverConfig fine = cfg;
  fine.grid = Grid(cfg.grid.dim(), 2 * cfg.grid.points());
  fine.steps = 2 * cfg.steps;
  const Model fine_model = build_model(params, fine.grid);
  // The design is resolution independent: the same (t, x, m) at double resolution.
  r.refined = master_residual(residual_samples(n_samples, fine), fine_model, fine);
  return r;
}

std::vector<ProjectionRow> projection_sweep(const std::vector<int>& Ns, double t, const Model& model,
                                            const SolverConfig& cfg, int n_tuples, std::uint64_t seed) {
  std::vector<ProjectionRow> rows;
  const int M = cfg.grid.points();
  for (int N : Ns) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> tuples(static_cast<std::size_t>(n_tuples));
    for (auto& x : tuples)
      for (int j = 0; j < N; ++j) x.push_back(int(rng() % std::uint64_t(M)));
    const ProjectionResidual r = residual_of_projection(N, t, model, cfg, tuples);
    rows.push_back({N, r.max_abs, r.max_remainder});
  }
  return rows;
}

std::vector<FlowRow> flow_sweep(double t0, const MeasureSpec& m0, double h_step, const ModelParams& params,
                                const SolverConfig& cfg) {
  std::vector<FlowRow> rows;
  // Snap the re-basing step to the coarsest time grid so every refinement hits it.
  const double dt0 = cfg.dt();
  h_step = std::max(1.0, std::round(h_step / dt0)) * dt0;
  for (int f : {1, 2, 4}) {
    SolverConfig c = cfg;
    c.steps = cfg.steps * f;
    const Model model = build_model(params, c.grid);
    FlowRow r;
    r.S = c.steps;
    r.dt = c.dt();
    r.gap = flow_consistency(t0, build_measure(m0, c.grid), h_step, model, c);
    r.bound = 10 * c.tol + r.dt;
    r.h_step = h_step;
    rows.push_back(r);
  }
  return rows;
}

RunOutcome run(const std::string& subcommand, const ExperimentConfig& cfg, const fs::path& out_dir) {
  RunOutcome out;
  out.subcommand = subcommand;
  out.config_hash = config_hash(cfg);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string());
  json manifest = {{"subcommand", subcommand}, {"config_hash", out.config_hash}, {"config", to_json(cfg)}};
  json timing = json::object();
  const auto start = std::chrono::steady_clock::now();
  try {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
      throw ConfigError("unknown subcommand '" + subcommand + "'");
    Ctx c{cfg, out_dir, out.config_hash, out, Model{}, solver_config(cfg), Measure{}};
    c.model = build_model(cfg.model, c.solver.grid);
    c.m0 = build_measure(cfg.experiment.m0, c.solver.grid);
    if (subcommand == "solve-mfg") run_solve_mfg(c);
    else if (subcommand == "kernel") run_kernel(c);
    else if (subcommand == "residual") run_residual(c);
    else if (subcommand == "flow") run_flow(c);
    else if (subcommand == "nash") run_nash(c);
    else if (subcommand == "converge") run_converge(c, timing);
    else if (subcommand == "project") run_project(c);
    else if (subcommand == "chaos") run_chaos(c);
    else if (subcommand == "tree") run_tree(c);
    else run_potential(c);
  } catch (const Error& e) {
    manifest["status"] = "error";
    manifest["error"] = {{"code", int(e.code())}, {"message", e.what()}};
    if (const auto* nc = dynamic_cast<const NonConvergence*>(&e)) {
      Csv csv(out_dir / "gap_log.csv", out.config_hash, {"iteration", "gap"});
      for (std::size_t k = 0; k < nc->gap_history().size(); ++k)
        csv.row({std::to_string(k + 1), num(nc->gap_history()[k])});
      manifest["artifacts"] = {"gap_log.csv"};
    }
    write_json(out_dir / "manifest.json", manifest);
    throw;
  }
  out.runtime_seconds = seconds_since(start);
  timing["total_seconds"] = out.runtime_seconds;
  manifest["status"] = "ok";
  manifest["artifacts"] = out.artifacts;
  manifest["summary"] = out.summary;
  write_json(out_dir / "manifest.json", manifest);
  write_json(out_dir / "timing.json", timing);
  return out;
}

}  // namespace mfg::harness
