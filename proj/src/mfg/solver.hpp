#pragma once

#include <vector>

#include "model/model.hpp"
#include "torus/grid.hpp"

namespace mfg {

/// Numerical parameters shared by every forward-backward solve. The global
/// time grid covers [0, T] with `steps` intervals; a solve started at t0 uses
/// the trailing part of it, so t0 must sit on the grid (t0 < 0 is allowed for
/// centered differences at the origin).
struct SolverConfig {
  Grid grid{1, 64};
  double T = 1.0;
  int steps = 100;
  double theta = 0.5;
  double tol = 1e-9;
  int max_iters = 500;
  int threads = 1;

  double dt() const { return T / steps; }
  /// Time grid from t0 to T with step dt(); throws if t0 is off the grid.
  TimeGrid timegrid(double t0) const;
  void validate() const;
};

struct MfgSolution {
  TimeGrid tg;
  std::vector<Field> u;    // S+1 slices
  std::vector<Measure> m;  // S+1 slices
  int iterations = 0;
  std::vector<double> gap_history;
  double clipped_mass = 0.0;

  int steps() const { return int(u.size()) - 1; }
  double final_gap() const { return gap_history.empty() ? 0.0 : gap_history.back(); }
  /// DpH(x, Du(t_s, x)).
  VectorField drift(const Model& model, int s) const;
};

struct LinearizedSolution {
  TimeGrid tg;
  std::vector<Field> v;
  std::vector<Field> mu;
  int iterations = 0;
  std::vector<double> gap_history;
};

/// Backward sweep u_S = G(m_S), u_s = P_dt(u_{s+1} + dt (F(m_s) - H(x, Du_{s+1}))).
/// Throws Divergence when sup|u| exceeds 1e6.
std::vector<Field> solve_hjb(const std::vector<Measure>& m_path, const Model& model, const TimeGrid& tg);

/// Forward sweep m_{s+1} = P_dt(m_s + dt div_upwind(m_s, b_s)), clipped and
/// renormalized. `drifts` holds b_0 .. b_{S-1} (b_S, if present, is unused).
std::vector<Measure> solve_fp(const std::vector<VectorField>& drifts, const Measure& m0, const TimeGrid& tg,
                              double* clipped = nullptr);
/// Same with b_s = DpH(x, Du_s).
std::vector<Measure> solve_fp(const std::vector<Field>& u_path, const Measure& m0, const Model& model,
                              const TimeGrid& tg, double* clipped = nullptr);

/// Damped Picard iteration on the m-path. Throws NonConvergence (with the gap
/// history) after max_iters sweeps.
MfgSolution solve_mfg(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg);

/// Linearized system around `sol`, started at slice s0 with perturbation mu0.
/// This is the exact tangent of the discrete scheme with the upwind sides
/// frozen, so it matches finite differences of solve_mfg to O(perturbation).
LinearizedSolution solve_linearized(const MfgSolution& sol, int s0, const Field& mu0, const Model& model,
                                    const SolverConfig& cfg);

/// Checks dt * L_H * sqrt(dim) <= h.
void check_cfl(const Model& model, const SolverConfig& cfg);

}  // namespace mfg
