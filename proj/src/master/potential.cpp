#include "master/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "common/error.hpp"
#include "torus/operators.hpp"
#include "torus/spectral.hpp"

namespace mfg {

double control_cost(const std::vector<Measure>& m_path, const std::vector<VectorField>& alpha, const Model& model,
                    const TimeGrid& tg, double constraint_tol) {
  const int S = tg.steps;
  if (int(m_path.size()) != S + 1 || int(alpha.size()) < S) throw InvalidArgument("path lengths do not match");
  const double dt = tg.dt();
  const Grid& g = m_path.front().grid();
  const double vol = g.cell_volume();
  double cost = 0.0;
  for (int s = 0; s < S; ++s) {
    Field step = m_path[s].density();
    step.axpy(dt, div_upwind_flux(m_path[s].density(), alpha[s]));
    heat_step_inplace(step, dt);
    const double res = sup_distance(step, m_path[s + 1].density());
    if (res > constraint_tol)
      throw InvalidArgument("control and measure path violate the Fokker-Planck constraint (residual " +
                            std::to_string(res) + ")");
    double run = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double mx = m_path[s][x];
      if (mx <= 0.0) continue;
      const double hs = model.H.Hstar(g.coord(x), alpha[s].at(x));
      if (!std::isfinite(hs)) throw DomainError("control leaves the domain of H* where the measure is positive");
      run += hs * mx;
    }
    cost += dt * (run * vol + model.F.potential(m_path[s].density()));
  }
  return cost + model.G.potential(m_path[S].density());
}

std::vector<VectorField> mfg_control(const MfgSolution& sol, const Model& model) {
  std::vector<VectorField> a;
  for (int s = 0; s < sol.steps(); ++s) a.push_back(sol.drift(model, s));
  return a;
}

double duality_value(const MfgSolution& sol, const Model& model) {
  const int S = sol.steps();
  const double dt = sol.tg.dt();
  const Grid& g = sol.m.front().grid();
  double cost = 0.0;
  for (int s = 0; s < S; ++s) {
    const VectorField p = gradient(sol.u[s]);
    double run = 0.0;
    for (std::size_t x = 0; x < g.size(); ++x) {
      const Vec px = p.at(x);
      const Vec a = model.H.DpH(g.coord(x), px);
      run += (a[0] * px[0] + a[1] * px[1] - model.H.H(g.coord(x), px)) * sol.m[s][x];
    }
    cost += dt * (run * g.cell_volume() + model.F.potential(sol.m[s].density()));
  }
  return cost + model.G.potential(sol.m[S].density());
}

double potential_value(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg) {
  const MfgSolution sol = solve_mfg(t0, m0, model, cfg);
  return control_cost(sol.m, mfg_control(sol, model), model, sol.tg);
}

namespace {

// Smooth perturbation with a few space-time Fourier modes, scaled to sup norm 1.
std::vector<VectorField> random_perturbation(const Grid& g, const TimeGrid& tg, std::mt19937_64& rng) {
  std::normal_distribution<double> N01;
  const int S = tg.steps;
  std::vector<VectorField> psi(std::size_t(S), VectorField{g});
  const double two_pi = 2.0 * std::numbers::pi;
  double sup = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    double c[3][2][2];
    for (auto& k : c)
      for (auto& t : k)
        for (double& v : t) v = N01(rng);
    for (int s = 0; s < S; ++s) {
      const double tau = double(s) / S;
      for (std::size_t n = 0; n < g.size(); ++n) {
        const Vec x = g.coord(n);
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double arg = two_pi * (k + 1) * (x[0] + (g.dim() == 2 ? 0.5 * x[1] : 0.0));
          const double time = 1.0 + 0.5 * std::cos(std::numbers::pi * tau * (k + 1));
          v += time * (c[k][0][0] * std::cos(arg) + c[k][0][1] * std::sin(arg)) +
               (c[k][1][0] * std::cos(two_pi * tau) + c[k][1][1] * std::sin(two_pi * tau)) / (k + 1);
        }
        psi[s].comp[a][n] = v;
      }
    }
  }
  for (const auto& p : psi) sup = std::max(sup, p.sup_norm());
  for (auto& p : psi)
    for (auto& c : p.comp) c *= 1.0 / sup;
  return psi;
}

double perturbed_cost(const MfgSolution& sol, const std::vector<VectorField>& base, const std::vector<VectorField>& psi,
                      double amp, const Model& model) {
  std::vector<VectorField> a = base;
  for (std::size_t s = 0; s < a.size(); ++s)
    for (int k = 0; k < int(a[s].comp.size()); ++k) a[s].comp[k].axpy(amp, psi[s].comp[k]);
  const std::vector<Measure> m = solve_fp(a, sol.m.front(), sol.tg);
  return control_cost(m, a, model, sol.tg);
}

}  // namespace

OptimalityReport optimality_check(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg,
                                  int n_perturbations, double amplitude, std::uint64_t seed) {
  const MfgSolution sol = solve_mfg(t0, m0, model, cfg);
  const std::vector<VectorField> base = mfg_control(sol, model);
  OptimalityReport rep;
  rep.amplitude = amplitude;
  rep.base_cost = control_cost(sol.m, base, model, sol.tg);
  std::mt19937_64 rng(seed);
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();
  for (int p = 0; p < n_perturbations; ++p) {
    const auto psi = random_perturbation(cfg.grid, sol.tg, rng);
    const double g1 = perturbed_cost(sol, base, psi, amplitude, model) - rep.base_cost;
    const double g2 = perturbed_cost(sol, base, psi, 2.0 * amplitude, model) - rep.base_cost;
    rep.gaps.push_back(g1);
    rep.gaps_doubled.push_back(g2);
    rep.min_gap = std::min(rep.min_gap, g1);
    const double ratio = g2 / g1;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  if (n_perturbations == 0) rep.min_gap = rep.min_ratio = rep.max_ratio = 0.0;
  return rep;
}

double hjb_measure_residual(double t, const Measure& m, const Model& model, const SolverConfig& cfg, double fd_eps) {
  if (fd_eps <= 0.0) fd_eps = 2.0 * cfg.dt();
  if (!(t < cfg.T - fd_eps + 1e-12)) throw InvalidArgument("HJB residual needs t <= T - fd_eps");
  const MfgSolution sol = solve_mfg(t, m, model, cfg);
  const double Up = potential_value(t + fd_eps, m, model, cfg);
  const double Um = potential_value(t - fd_eps, m, model, cfg);
  const Field& U = sol.u[0];
  const Field H = model.H.on_grid(gradient(U));
  const Field lap = laplacian(U);
  const double dt_term = (Up - Um) / (2.0 * fd_eps);
  const double r = -dt_term + H.dot(m.density()) - lap.dot(m.density()) - model.F.potential(m.density());
  return std::abs(r);
}

}  // namespace mfg
