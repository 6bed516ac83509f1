#pragma once

#include <cstdint>
#include <vector>

#include "mfg/solver.hpp"

namespace mfg {

/// Discrete cost of a controlled Fokker-Planck path:
///   sum_{s<S} dt [ sum_x H*(x, a_s) m_s h^dim + F(m_s) ] + G(m_S),
/// with F, G the potentials of the model couplings. The pair must satisfy the
/// discrete Fokker-Planck step with drift a_s to within `constraint_tol`
/// (InvalidArgument otherwise); a control outside the domain of H* where
/// m_s > 0 raises DomainError.
double control_cost(const std::vector<Measure>& m_path, const std::vector<VectorField>& alpha, const Model& model,
                    const TimeGrid& tg, double constraint_tol = 1e-8);

/// Optimal feedback a_s = DpH(x, Du_s) of an MFG solution.
std::vector<VectorField> mfg_control(const MfgSolution& sol, const Model& model);

/// The same cost evaluated through the Fenchel identity H*(DpH(p)) = DpH(p).p - H(p)
/// from (u, m) alone.
double duality_value(const MfgSolution& sol, const Model& model);

/// Value of the control problem at (t0, m0): the cost of the MFG pair.
double potential_value(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg);

struct OptimalityReport {
  double base_cost = 0.0;
  double amplitude = 0.0;
  std::vector<double> gaps;          // J(perturbed) - J(MFG) at `amplitude`
  std::vector<double> gaps_doubled;  // same at 2 * amplitude
  double min_gap = 0.0;
  double min_ratio = 0.0;  // min over perturbations of gaps_doubled / gaps
  double max_ratio = 0.0;
};

/// Random smooth bounded perturbations a + amplitude * psi of the MFG control,
/// each re-projected onto the Fokker-Planck constraint by re-solving it.
OptimalityReport optimality_check(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg,
                                  int n_perturbations, double amplitude, std::uint64_t seed);

/// |-dt U + int H(y, D_xU) dm - int Lap_y U dm - F(m)| for the control value U,
/// with a centered time difference of step fd_eps (<= 0 selects 2 dt).
double hjb_measure_residual(double t, const Measure& m, const Model& model, const SolverConfig& cfg,
                            double fd_eps = 0.0);

}  // namespace mfg
