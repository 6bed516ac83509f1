#pragma once

#include <string>

#include "model/coupling.hpp"
#include "model/hamiltonian.hpp"

namespace mfg {

/// User-facing model parameters (the `model` block of a run configuration).
struct ModelParams {
  std::string hamiltonian = "relativistic";  // relativistic | truncated_quadratic | constant
  double eps = 0.1;
  double radius = 1.0;      // truncated quadratic only
  double h_constant = 0.0;  // constant Hamiltonian only
  std::string coupling = "identity";  // identity | cubic | negated | zero
  double sigma = 0.1;
  double sigma_g = 0.1;
  double kappa = 1.0;
  double kappa_g = 1.0;
  double beta = 0.0;
};

/// Hamiltonian plus running and terminal couplings on one grid. F and G are
/// always potential: F = dF/dm and G = dG/dm with the functionals exposed by
/// Coupling::potential.
struct Model {
  Hamiltonian H;
  Coupling F;
  Coupling G;
  double beta = 0.0;

  const Grid& grid() const { return F.grid(); }
  bool monotone() const { return F.monotone() && G.monotone(); }
  /// F = G = 0 and H independent of p with H(., 0) = 0.
  bool trivial() const;
};

Model build_model(const ModelParams& p, const Grid& g);
/// F = G = 0, H = 0.
Model trivial_model(const Grid& g);
Profile parse_profile(const std::string& name);
HamiltonianKind parse_hamiltonian(const std::string& name);

}  // namespace mfg
