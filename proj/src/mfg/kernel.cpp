#include "mfg/kernel.hpp"

#include <cmath>

#include "common/parallel.hpp"
#include "torus/operators.hpp"

namespace mfg {

Field DerivativeKernel::row(std::size_t x) const {
  Field f(grid());
  for (std::size_t y = 0; y < n(); ++y) f[y] = at(x, y);
  return f;
}

Field DerivativeKernel::pair(const Field& mu) const {
  Field out(grid());
  const double vol = grid().cell_volume();
  for (std::size_t x = 0; x < n(); ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n(); ++y) s += K[x * n() + y] * mu[y];
    out[x] = s * vol;
  }
  return out;
}

std::vector<std::vector<double>> DerivativeKernel::intrinsic() const {
  const std::size_t N = n();
  std::vector<std::vector<double>> out(std::size_t(grid().dim()), std::vector<double>(N * N));
  for (std::size_t x = 0; x < N; ++x) {
    const VectorField d = gradient(row(x));
    for (int a = 0; a < grid().dim(); ++a)
      for (std::size_t y = 0; y < N; ++y) out[a][x * N + y] = d.comp[a][y];
  }
  return out;
}

std::vector<double> DerivativeKernel::intrinsic_divergence() const {
  const std::size_t N = n();
  std::vector<double> out(N * N);
  for (std::size_t x = 0; x < N; ++x) {
    const Field d = divergence(gradient(row(x)));
    for (std::size_t y = 0; y < N; ++y) out[x * N + y] = d[y];
  }
  return out;
}

double DerivativeKernel::normalization_error() const {
  const Field p = pair(m0.density());
  return p.sup_norm();
}

DerivativeKernel derivative_kernel(const MfgSolution& sol, int s0, const Model& model, const SolverConfig& cfg) {
  DerivativeKernel k;
  k.t0 = sol.tg.time(s0);
  k.m0 = sol.m[s0];
  const Grid& g = k.grid();
  const std::size_t N = g.size();
  k.K.assign(N * N, 0.0);
  SolverConfig inner = cfg;
  inner.threads = 1;
  parallel_for(N, cfg.threads, [&](std::size_t y) {
    Field mu0(g);
    mu0[y] = 1.0 / g.cell_volume();
    const LinearizedSolution lin = solve_linearized(sol, s0, mu0, model, inner);
    for (std::size_t x = 0; x < N; ++x) k.K[x * N + y] = lin.v[0][x];
  });
  const Field shift = k.pair(k.m0.density());
  for (std::size_t x = 0; x < N; ++x)
    for (std::size_t y = 0; y < N; ++y) k.K[x * N + y] -= shift[x];
  return k;
}

DerivativeKernel derivative_kernel(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg) {
  const MfgSolution sol = solve_mfg(t0, m0, model, cfg);
  return derivative_kernel(sol, 0, model, cfg);
}

}  // namespace mfg
