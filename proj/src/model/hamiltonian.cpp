#include "model/hamiltonian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "common/error.hpp"

namespace mfg {

namespace {

double norm2(const Vec& p) { return p[0] * p[0] + p[1] * p[1]; }

}  // namespace

Hamiltonian::Hamiltonian(HamiltonianKind kind, int dim, double eps, double radius, double constant)
    : kind_(kind), dim_(dim), eps_(eps), radius_(radius), constant_(constant) {
  if (dim != 1 && dim != 2) throw InvalidArgument("Hamiltonian dimension must be 1 or 2");
  if (kind == HamiltonianKind::TruncatedQuadratic && !(radius > 0.0))
    throw InvalidArgument("truncation radius must be positive");
}

double Hamiltonian::potential(const Vec& x) const {
  return eps_ == 0.0 ? 0.0 : eps_ * std::cos(2.0 * std::numbers::pi * x[0]);
}

double Hamiltonian::H(const Vec& x, const Vec& p) const {
  const double r2 = norm2(p);
  switch (kind_) {
    case HamiltonianKind::Relativistic:
      // sqrt(1+r2)-1 written to avoid cancellation for small p
      return r2 / (std::sqrt(1.0 + r2) + 1.0) + potential(x);
    case HamiltonianKind::TruncatedQuadratic: {
      const double r = std::sqrt(r2);
      const double core = r <= radius_ ? 0.5 * r2 : radius_ * r - 0.5 * radius_ * radius_;
      return core + potential(x);
    }
    case HamiltonianKind::Constant:
      return constant_ + potential(x);
  }
  return 0.0;
}

Vec Hamiltonian::DpH(const Vec&, const Vec& p) const {
  switch (kind_) {
    case HamiltonianKind::Relativistic: {
      const double s = 1.0 / std::sqrt(1.0 + norm2(p));
      return {p[0] * s, p[1] * s};
    }
    case HamiltonianKind::TruncatedQuadratic: {
      const double r = std::sqrt(norm2(p));
      if (r <= radius_) return p;
      return {radius_ * p[0] / r, radius_ * p[1] / r};
    }
    case HamiltonianKind::Constant:
      return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

Mat2 Hamiltonian::DppH(const Vec&, const Vec& p) const {
  Mat2 A{{{0.0, 0.0}, {0.0, 0.0}}};
  switch (kind_) {
    case HamiltonianKind::Relativistic: {
      const double q = 1.0 + norm2(p);
      const double s = 1.0 / std::sqrt(q);
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) A[a][b] = s * ((a == b ? 1.0 : 0.0) - p[a] * p[b] / q);
      return A;
    }
    case HamiltonianKind::TruncatedQuadratic: {
      const double r = std::sqrt(norm2(p));
      if (r <= radius_) {
        for (int a = 0; a < dim_; ++a) A[a][a] = 1.0;
        return A;
      }
      for (int a = 0; a < dim_; ++a)
        for (int b = 0; b < dim_; ++b) A[a][b] = radius_ / r * ((a == b ? 1.0 : 0.0) - p[a] * p[b] / (r * r));
      return A;
    }
    case HamiltonianKind::Constant:
      return A;
  }
  return A;
}

double Hamiltonian::Hstar(const Vec& x, const Vec& a) const {
  const double inf = std::numeric_limits<double>::infinity();
  const double r2 = norm2(a);
  switch (kind_) {
    case HamiltonianKind::Relativistic:
      if (r2 >= 1.0) return inf;
      return r2 / (1.0 + std::sqrt(1.0 - r2)) - potential(x);
    case HamiltonianKind::TruncatedQuadratic:
      if (r2 > radius_ * radius_) return inf;
      return 0.5 * r2 - potential(x);
    case HamiltonianKind::Constant:
      if (r2 > 0.0) return inf;
      return -constant_ - potential(x);
  }
  return inf;
}

double Hamiltonian::lipschitz() const {
  switch (kind_) {
    case HamiltonianKind::Relativistic: return 1.0;
    case HamiltonianKind::TruncatedQuadratic: return radius_;
    case HamiltonianKind::Constant: return 0.0;
  }
  return 0.0;
}

Field Hamiltonian::on_grid(const VectorField& p) const {
  const Grid& g = p.grid();
  Field out(g);
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = H(g.coord(n), p.at(n));
  return out;
}

VectorField Hamiltonian::drift(const VectorField& p) const {
  const Grid& g = p.grid();
  VectorField out(g);
  for (std::size_t n = 0; n < g.size(); ++n) out.set(n, DpH(g.coord(n), p.at(n)));
  return out;
}

VectorField Hamiltonian::hessian_apply(const VectorField& p, const VectorField& q) const {
  const Grid& g = p.grid();
  VectorField out(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Mat2 A = DppH(g.coord(n), p.at(n));
    const Vec v = q.at(n);
    out.set(n, {A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1]});
  }
  return out;
}

}  // namespace mfg
