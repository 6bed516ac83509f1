#pragma once

#include <span>
#include <vector>

#include "torus/grid.hpp"

namespace mfg {

/// Central difference (f[k+1] - f[k-1]) / (2h) per axis, wrapped.
VectorField gradient(const Field& f);

/// Central-difference divergence, the adjoint partner of `gradient`.
Field divergence(const VectorField& v);

/// Discrete div(m b) by first-order upwind finite volumes.
///
/// Sign convention: the Fokker-Planck step m <- m + dt (Lap m + div_upwind_flux(m, b))
/// transports mass with velocity -b. Face velocities are a = -(b_k + b_{k+1}) / 2 and
/// the face flux takes m from the upwind side of a, so the result sums to zero and the
/// explicit step keeps m >= 0 whenever dt * sum_axes max|a| <= h. Works on signed
/// densities as well.
Field div_upwind_flux(const Field& m, const VectorField& b);

/// Directional derivative of div_upwind_flux(m, b) in b along db, with the upwind
/// side frozen at the choice made by b.
Field div_upwind_flux_dir(const Field& m, const VectorField& b, const VectorField& db);

/// max over nodes of sum over axes of |b_axis|; the CFL quantity for the upwind step.
double max_axis_speed(const VectorField& b);

/// Multilinear periodic interpolation at an arbitrary point (wrapped into [0,1)^dim).
double interp(const Field& f, const Vec& x);
Vec interp(const VectorField& v, const Vec& x);

/// Linear splatting of weighted points onto the grid (adjoint of interp).
/// Weights must be nonnegative and sum to 1. Throws on an empty list.
Measure deposit(const Grid& g, std::span<const Vec> points, std::span<const double> weights);
/// Equal weights 1/n.
Measure deposit(const Grid& g, std::span<const Vec> points);
/// Signed splatting: adds weight w at x into `density` (no normalization).
void splat(Field& density, const Vec& x, double w);

/// (id + scale * phi) # m, realized by re-depositing each node's mass at its image.
Measure push_forward(const Measure& m, const VectorField& phi, double scale);
/// Rigid shift (id + a) # m by re-deposition.
Measure shift_measure(const Measure& m, const Vec& a);

}  // namespace mfg
