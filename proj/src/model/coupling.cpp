#include "model/coupling.hpp"

#include <cmath>

#include "common/error.hpp"

namespace mfg {

Field smoothing_kernel(const Grid& g, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("kernel width must be positive");
  Field rho(g);
  const Vec origin{0.0, 0.0};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double d = torus_distance(origin, g.coord(n), g.dim());
    if (d <= 5.0 * sigma) rho[n] = std::exp(-0.5 * d * d / (sigma * sigma));
  }
  rho *= 1.0 / rho.integral();
  return rho;
}

Coupling::Coupling(const Grid& g, double sigma, Profile profile, double kappa)
    : rho_(smoothing_kernel(g, sigma)), conv_(rho_), sigma_(sigma), kappa_(kappa), profile_(profile) {}

double Coupling::phi(double t) const {
  switch (profile_) {
    case Profile::Identity: return t;
    case Profile::Cubic: return t * t * t;
    case Profile::Negated: return -t;
  }
  return t;
}

double Coupling::dphi(double t) const {
  switch (profile_) {
    case Profile::Identity: return 1.0;
    case Profile::Cubic: return 3.0 * t * t;
    case Profile::Negated: return -1.0;
  }
  return 1.0;
}

double Coupling::psi(double t) const {
  switch (profile_) {
    case Profile::Identity: return 0.5 * t * t;
    case Profile::Cubic: return 0.25 * t * t * t * t;
    case Profile::Negated: return -0.5 * t * t;
  }
  return 0.5 * t * t;
}

Field Coupling::operator()(const Field& m) const {
  if (is_zero()) return Field(m.grid());
  Field theta = conv_.apply(m);
  if (profile_ != Profile::Identity)
    for (double& v : theta.values()) v = phi(v);
  Field out = conv_.apply(theta);
  out *= kappa_;
  return out;
}

Field Coupling::derivative(const Field& m, const Field& mu) const {
  if (is_zero()) return Field(m.grid());
  Field t = conv_.apply(mu);
  if (profile_ == Profile::Negated) {
    t *= -1.0;
  } else if (profile_ == Profile::Cubic) {
    const Field theta = conv_.apply(m);
    for (std::size_t n = 0; n < t.size(); ++n) t[n] *= dphi(theta[n]);
  }
  Field out = conv_.apply(t);
  out *= kappa_;
  return out;
}

std::vector<double> Coupling::derivative_kernel(const Field& m) const {
  const Grid& g = m.grid();
  const std::size_t n = g.size();
  std::vector<double> K(n * n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    Field delta(g);
    delta[y] = 1.0;
    const Field col = derivative(m, delta);
    for (std::size_t x = 0; x < n; ++x) K[x * n + y] = col[x];
  }
  return K;
}

double Coupling::potential(const Field& m) const {
  if (is_zero()) return 0.0;
  const Field theta = conv_.apply(m);
  double s = 0.0;
  for (double v : theta.values()) s += psi(v);
  return kappa_ * s * m.grid().cell_volume();
}

double Coupling::at_empirical(std::size_t x_node, std::span<const std::size_t> atoms) const {
  if (is_zero()) return 0.0;
  const Grid& g = grid();
  if (atoms.empty()) throw InvalidArgument("empirical measure needs at least one atom");
  const std::size_t n = g.size();
  const double w = 1.0 / double(atoms.size());
  // (rho * m)(z) = w * sum_j rho(z - x_j); the grid Dirac height 1/h^d cancels
  // the quadrature weight h^d.
  auto rho_at = [&](std::size_t z, std::size_t y) {
    if (g.dim() == 1) return rho_[g.index(int(z) - int(y))];
    const int M = g.points();
    return rho_[g.index(int(z / M) - int(y / M), int(z % M) - int(y % M))];
  };
  double acc = 0.0;
  for (std::size_t z = 0; z < n; ++z) {
    const double r = rho_at(x_node, z);
    if (r == 0.0) continue;
    double theta = 0.0;
    for (std::size_t y : atoms) theta += rho_at(z, y);
    acc += r * phi(w * theta);
  }
  return kappa_ * acc * g.cell_volume();
}

double monotonicity_gap(const Coupling& c, const Field& m, const Field& m2) {
  Field dm = m - m2;
  const Field dF = c(m) - c(m2);
  return dF.dot(dm);
}

}  // namespace mfg
