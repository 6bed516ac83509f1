#pragma once

#include <span>

#include "torus/grid.hpp"
#include "torus/spectral.hpp"

namespace mfg {

enum class Profile {
  Identity,  // Phi(theta) = theta
  Cubic,     // Phi(theta) = theta^3, nondecreasing and nonlinear
  Negated,   // Phi(theta) = -theta, non-monotone (diagnostics only)
};

/// Smoothed coupling C(x,m) = kappa * (rho * Phi(rho * m))(x), with rho a
/// discrete wrapped Gaussian (truncated at 5 sigma, unit grid mass, even).
///
/// Its potential is kappa * int Psi(rho * m) with Psi' = Phi, and its flat
/// derivative applied to a signed density mu is
/// kappa * rho * [Phi'(rho * m) (rho * mu)].
class Coupling {
 public:
  Coupling() = default;
  Coupling(const Grid& g, double sigma, Profile profile, double kappa);
  static Coupling zero(const Grid& g) { return Coupling(g, 0.1, Profile::Identity, 0.0); }

  const Grid& grid() const { return rho_.grid(); }
  const Field& rho() const { return rho_; }
  double sigma() const { return sigma_; }
  double kappa() const { return kappa_; }
  Profile profile() const { return profile_; }
  bool is_zero() const { return kappa_ == 0.0; }
  bool monotone() const { return profile_ != Profile::Negated || kappa_ == 0.0; }

  /// C(., m) for a density (signed densities allowed; used after translations).
  Field operator()(const Field& m) const;
  Field operator()(const Measure& m) const { return (*this)(m.density()); }
  /// Flat derivative at m applied to mu: int dC/dm(., m, y) mu(y) dy.
  Field derivative(const Field& m, const Field& mu) const;
  /// Flat-derivative kernel K(x, y) at m, row-major [x][y].
  std::vector<double> derivative_kernel(const Field& m) const;
  /// Potential functional kappa * int Psi(rho * m).
  double potential(const Field& m) const;

  /// C(x_node, m) for the empirical measure placing equal unit mass on the
  /// grid nodes `atoms` (each deposited as a grid Dirac).
  double at_empirical(std::size_t x_node, std::span<const std::size_t> atoms) const;

  double phi(double theta) const;
  double dphi(double theta) const;
  double psi(double theta) const;

 private:
  Field rho_;
  Convolver conv_;
  double sigma_ = 0.1;
  double kappa_ = 1.0;
  Profile profile_ = Profile::Identity;
};

/// Discrete wrapped Gaussian kernel on the node offsets, truncated at 5 sigma
/// and normalized to unit grid mass.
Field smoothing_kernel(const Grid& g, double sigma);

/// int (C(m) - C(m2)) d(m - m2) by grid quadrature.
double monotonicity_gap(const Coupling& c, const Field& m, const Field& m2);

}  // namespace mfg
