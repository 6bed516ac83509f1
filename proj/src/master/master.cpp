#include "master/master.hpp"

#include <cmath>

#include "common/error.hpp"
#include "torus/operators.hpp"
#include "torus/spectral.hpp"
#include "torus/wasserstein.hpp"

namespace mfg {

namespace {

std::size_t nearest_node(const Grid& g, const Vec& x) {
  const int M = g.points();
  const int i = int(std::lround((x[0] - std::floor(x[0])) * M));
  if (g.dim() == 1) return g.index(i);
  const int j = int(std::lround((x[1] - std::floor(x[1])) * M));
  return g.index(i, j);
}

}  // namespace

Field evaluate_U(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg) {
  return solve_mfg(t0, m0, model, cfg).u[0];
}

MasterTerms master_terms(double t, const Measure& m, const Model& model, const SolverConfig& cfg, double fd_eps) {
  if (fd_eps <= 0.0) fd_eps = 2.0 * cfg.dt();
  if (!(t < cfg.T - fd_eps + 1e-12)) throw InvalidArgument("master residual needs t <= T - fd_eps");
  const Grid& g = cfg.grid;
  const std::size_t n = g.size();
  const double vol = g.cell_volume();

  const MfgSolution sol = solve_mfg(t, m, model, cfg);
  const DerivativeKernel k = derivative_kernel(sol, 0, model, cfg);
  const Field& U = sol.u[0];
  const Field Up = evaluate_U(t + fd_eps, m, model, cfg);
  const Field Um = evaluate_U(t - fd_eps, m, model, cfg);

  MasterTerms r;
  r.t = t;
  r.dtU = Up - Um;
  r.dtU *= 1.0 / (2.0 * fd_eps);
  r.lapU = laplacian(U);
  const VectorField DU = gradient(U);
  r.hamiltonian = model.H.on_grid(DU);
  const VectorField drift = model.H.drift(DU);
  const auto DmU = k.intrinsic();
  const auto divDmU = k.intrinsic_divergence();
  r.div_term = Field(g);
  r.transport = Field(g);
  for (std::size_t x = 0; x < n; ++x) {
    double dsum = 0.0, tsum = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double w = m[y] * vol;
      dsum += divDmU[x * n + y] * w;
      double dot = 0.0;
      for (int a = 0; a < g.dim(); ++a) dot += DmU[a][x * n + y] * drift.comp[a][y];
      tsum += dot * w;
    }
    r.div_term[x] = dsum;
    r.transport[x] = tsum;
  }
  r.coupling = model.F(m);
  r.residual = Field(g);
  for (std::size_t x = 0; x < n; ++x)
    r.residual[x] = -r.dtU[x] - r.lapU[x] + r.hamiltonian[x] - r.div_term[x] + r.transport[x] - r.coupling[x];
  return r;
}

MasterResidualReport master_residual(const std::vector<MasterSample>& samples, const Model& model,
                                     const SolverConfig& cfg, double fd_eps) {
  MasterResidualReport rep;
  rep.M = cfg.grid.points();
  rep.S = cfg.steps;
  rep.fd_eps = fd_eps > 0.0 ? fd_eps : 2.0 * cfg.dt();
  double total = 0.0;
  for (const MasterSample& s : samples) {
    const MasterTerms t = master_terms(s.t, s.m, model, cfg, rep.fd_eps);
    MasterSampleRecord rec;
    rec.t = s.t;
    rec.x = s.x;
    rec.node = nearest_node(cfg.grid, s.x);
    rec.dtU = t.dtU[rec.node];
    rec.lapU = t.lapU[rec.node];
    rec.hamiltonian = t.hamiltonian[rec.node];
    rec.div_term = t.div_term[rec.node];
    rec.transport = t.transport[rec.node];
    rec.coupling = t.coupling[rec.node];
    rec.residual = t.residual[rec.node];
    if (!std::isfinite(rec.residual)) throw Error(ErrorCode::Numerical, "master residual is not finite");
    rep.max_abs = std::max(rep.max_abs, std::abs(rec.residual));
    total += std::abs(rec.residual);
    rep.samples.push_back(rec);
  }
  if (!rep.samples.empty()) rep.mean_abs = total / double(rep.samples.size());
  return rep;
}

double taylor_check(const DerivativeKernel& k, const Field& U0, const Measure& m1, const Model& model,
                    const SolverConfig& cfg) {
  const double d1 = wasserstein1(k.m0, m1);
  if (d1 == 0.0) return 0.0;
  const Field U1 = evaluate_U(k.t0, m1, model, cfg);
  Field rem = U1 - U0;
  rem -= k.pair(m1.density() - k.m0.density());
  return rem.sup_norm() / (d1 * d1);
}

double taylor_check(double t0, const Measure& m0, const Measure& m1, const Model& model, const SolverConfig& cfg) {
  if (wasserstein1(m0, m1) == 0.0) return 0.0;
  const MfgSolution sol = solve_mfg(t0, m0, model, cfg);
  const DerivativeKernel k = derivative_kernel(sol, 0, model, cfg);
  return taylor_check(k, sol.u[0], m1, model, cfg);
}

double flow_consistency(double t0, const Measure& m0, double h_step, const Model& model, const SolverConfig& cfg) {
  if (h_step == 0.0) return 0.0;
  const MfgSolution sol = solve_mfg(t0, m0, model, cfg);
  const double steps = h_step / sol.tg.dt();
  const int k = int(std::lround(steps));
  if (std::abs(steps - k) > 1e-9) throw InvalidArgument("flow step must be a multiple of dt");
  if (k < 0 || k >= sol.steps()) throw InvalidArgument("flow step must satisfy t0 + h < T");
  const Field U = evaluate_U(sol.tg.time(k), sol.m[k], model, cfg);
  return sup_distance(sol.u[k], U);
}

double vector_field_derivative_check(const DerivativeKernel& k, const VectorField& phi, double h, const Model& model,
                                     const SolverConfig& cfg) {
  const Grid& g = k.grid();
  if (h * phi.sup_norm() > g.h() * (1.0 + 1e-12))
    throw InvalidArgument("push-forward step must stay within one grid cell");
  const Field Up = evaluate_U(k.t0, push_forward(k.m0, phi, h), model, cfg);
  const Field Um = evaluate_U(k.t0, push_forward(k.m0, phi, -h), model, cfg);
  Field fd = Up - Um;
  fd *= 1.0 / (2.0 * h);
  const auto DmU = k.intrinsic();
  const std::size_t n = g.size();
  Field quad(g);
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      double dot = 0.0;
      for (int a = 0; a < g.dim(); ++a) dot += DmU[a][x * n + y] * phi.comp[a][y];
      s += dot * k.m0[y];
    }
    quad[x] = s * g.cell_volume();
  }
  return sup_distance(fd, quad);
}

double vector_field_derivative_check(double t0, const Measure& m0, const VectorField& phi, double h,
                                     const Model& model, const SolverConfig& cfg) {
  if (phi.sup_norm() == 0.0) return 0.0;
  return vector_field_derivative_check(derivative_kernel(t0, m0, model, cfg), phi, h, model, cfg);
}

std::vector<double> second_kernel_fd(double t0, const Measure& m0, const Field& mu, double eps, const Model& model,
                                     const SolverConfig& cfg) {
  const std::size_t n = m0.size();
  if (mu.sup_norm() == 0.0) return std::vector<double>(n * n, 0.0);
  if (std::abs(mu.integral()) > 1e-12) throw InvalidArgument("second_kernel_fd needs a zero-mass direction");
  Field shifted = m0.density();
  shifted.axpy(eps, mu);
  const DerivativeKernel k0 = derivative_kernel(t0, m0, model, cfg);
  const DerivativeKernel k1 = derivative_kernel(t0, Measure(shifted), model, cfg);
  std::vector<double> S(n * n);
  for (std::size_t i = 0; i < n * n; ++i) S[i] = (k1.K[i] - k0.K[i]) / eps;
  return S;
}

Field pair_slice(const std::vector<double>& S, const Field& mu) {
  const Grid& g = mu.grid();
  const std::size_t n = g.size();
  Field out(g);
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) s += S[x * n + y] * mu[y];
    out[x] = s * g.cell_volume();
  }
  return out;
}

}  // namespace mfg
