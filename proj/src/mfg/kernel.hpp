#pragma once

#include <vector>

#include "mfg/solver.hpp"

namespace mfg {

/// K(x, y) approximating the flat derivative of U at (t0, m0), stored
/// row-major [x][y] and normalized so that sum_y K(x, y) m0(y) h^dim = 0.
struct DerivativeKernel {
  double t0 = 0.0;
  Measure m0;
  std::vector<double> K;

  const Grid& grid() const { return m0.grid(); }
  std::size_t n() const { return m0.size(); }
  double at(std::size_t x, std::size_t y) const { return K[x * n() + y]; }
  /// y -> K(x, y).
  Field row(std::size_t x) const;
  /// x -> sum_y K(x, y) mu(y) h^dim.
  Field pair(const Field& mu) const;
  /// Intrinsic derivative D_y K(x, y) by central differences in y; one
  /// row-major matrix per axis.
  std::vector<std::vector<double>> intrinsic() const;
  /// div_y D_y K(x, y) (central differences applied twice).
  std::vector<double> intrinsic_divergence() const;
  /// max_x |sum_y K(x, y) m0(y) h^dim|.
  double normalization_error() const;
};

/// Kernel from the linearized system around an existing solution, started at
/// slice s0 (the base measure is sol.m[s0]). Columns run in parallel.
DerivativeKernel derivative_kernel(const MfgSolution& sol, int s0, const Model& model, const SolverConfig& cfg);
/// Solves the MFG system at (t0, m0) first.
DerivativeKernel derivative_kernel(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg);

}  // namespace mfg
