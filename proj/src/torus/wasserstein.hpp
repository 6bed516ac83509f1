#pragma once

#include "torus/grid.hpp"

namespace mfg {

/// Monge-Kantorovich (Wasserstein-1) distance between two densities on the same
/// grid, with the periodic ground metric.
///
/// dim 1 is exact through the circle CDF formula. dim 2 solves the discrete
/// transport problem exactly and is limited to M <= 24 (CapabilityError above).
double wasserstein1(const Field& a, const Field& b);
inline double wasserstein1(const Measure& a, const Measure& b) { return wasserstein1(a.density(), b.density()); }

}  // namespace mfg
