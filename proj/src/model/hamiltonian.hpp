#pragma once

#include <array>

#include "torus/grid.hpp"

namespace mfg {

using Mat2 = std::array<std::array<double, 2>, 2>;

enum class HamiltonianKind {
  Relativistic,        // sqrt(1+|p|^2) - 1
  TruncatedQuadratic,  // |p|^2/2 for |p| <= R, R|p| - R^2/2 beyond
  Constant,            // c, independent of p
};

/// Hamiltonian H(x,p) = h0(p) + eps*cos(2 pi x_1) with Legendre conjugate
/// H*(x,a) = sup_p (a.p - H(x,p)). Unused vector components are zero in dim 1.
class Hamiltonian {
 public:
  Hamiltonian() = default;
  Hamiltonian(HamiltonianKind kind, int dim, double eps, double radius = 1.0, double constant = 0.0);

  static Hamiltonian relativistic(int dim, double eps) { return {HamiltonianKind::Relativistic, dim, eps}; }
  static Hamiltonian truncated_quadratic(int dim, double eps, double radius) {
    return {HamiltonianKind::TruncatedQuadratic, dim, eps, radius};
  }
  static Hamiltonian constant(int dim, double c) { return {HamiltonianKind::Constant, dim, 0.0, 1.0, c}; }

  double H(const Vec& x, const Vec& p) const;
  Vec DpH(const Vec& x, const Vec& p) const;
  Mat2 DppH(const Vec& x, const Vec& p) const;
  /// +infinity outside the effective domain.
  double Hstar(const Vec& x, const Vec& a) const;
  /// Bound on |DpH| over all (x,p).
  double lipschitz() const;

  HamiltonianKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double eps() const { return eps_; }
  double radius() const { return radius_; }
  bool x_independent() const { return eps_ == 0.0; }

  /// H(x, p) with p taken from a gradient field, evaluated at every node.
  Field on_grid(const VectorField& p) const;
  /// DpH(x, p) at every node.
  VectorField drift(const VectorField& p) const;
  /// DppH(x, p) q at every node.
  VectorField hessian_apply(const VectorField& p, const VectorField& q) const;

 private:
  double potential(const Vec& x) const;

  HamiltonianKind kind_ = HamiltonianKind::Relativistic;
  int dim_ = 1;
  double eps_ = 0.0;
  double radius_ = 1.0;
  double constant_ = 0.0;
};

}  // namespace mfg
