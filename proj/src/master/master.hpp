#pragma once

#include <vector>

#include "mfg/kernel.hpp"
#include "mfg/solver.hpp"

namespace mfg {

/// U(t0, ., m0) = u(t0, .) of the MFG system started at (t0, m0).
Field evaluate_U(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg);

/// Every term of the first-order master equation at one (t, m), per x node.
struct MasterTerms {
  double t = 0.0;
  Field dtU, lapU, hamiltonian, div_term, transport, coupling, residual;
};

struct MasterSampleRecord {
  double t = 0.0;
  Vec x{0.0, 0.0};
  std::size_t node = 0;
  double dtU = 0, lapU = 0, hamiltonian = 0, div_term = 0, transport = 0, coupling = 0, residual = 0;
};

struct MasterResidualReport {
  std::vector<MasterSampleRecord> samples;
  int M = 0;
  int S = 0;
  double fd_eps = 0.0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

/// Residual -dtU - Lap_x U + H(x, D_xU) - int div_y D_mU dm + int D_mU . DpH(y, D_xU(y)) dm - F(x, m).
/// dtU is a centered difference with step fd_eps (fd_eps <= 0 selects 2 dt).
MasterTerms master_terms(double t, const Measure& m, const Model& model, const SolverConfig& cfg, double fd_eps = 0.0);

struct MasterSample {
  double t;
  Vec x;
  Measure m;
};
MasterResidualReport master_residual(const std::vector<MasterSample>& samples, const Model& model,
                                     const SolverConfig& cfg, double fd_eps = 0.0);

/// ||U(t0,.,m1) - U(t0,.,m0) - <K, m1 - m0>||_inf / d1(m0, m1)^2, or 0 when m1 = m0.
double taylor_check(double t0, const Measure& m0, const Measure& m1, const Model& model, const SolverConfig& cfg);
/// Same with a precomputed solution and kernel at (t0, m0).
double taylor_check(const DerivativeKernel& k, const Field& U0, const Measure& m1, const Model& model,
                    const SolverConfig& cfg);

/// sup_x |u(t0+h_step, x) - U(t0+h_step, x, m(t0+h_step))| with (u, m) solved from (t0, m0).
double flow_consistency(double t0, const Measure& m0, double h_step, const Model& model, const SolverConfig& cfg);

/// sup_x | [U((id+h phi)#m0) - U((id-h phi)#m0)] / (2h) - int D_yK(x,y) . phi(y) m0(y) dy |.
/// Requires h |phi| <= grid spacing so the re-deposition stays on neighbouring nodes.
double vector_field_derivative_check(double t0, const Measure& m0, const VectorField& phi, double h,
                                     const Model& model, const SolverConfig& cfg);
double vector_field_derivative_check(const DerivativeKernel& k, const VectorField& phi, double h,
                                     const Model& model, const SolverConfig& cfg);

/// [K(t0, m0 + eps mu) - K(t0, m0)] / eps, row-major [x][y].
std::vector<double> second_kernel_fd(double t0, const Measure& m0, const Field& mu, double eps, const Model& model,
                                     const SolverConfig& cfg);
/// x -> sum_y S(x, y) mu(y) h^dim for a row-major kernel slice S.
Field pair_slice(const std::vector<double>& S, const Field& mu);

}  // namespace mfg
