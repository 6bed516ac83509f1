#include "mfg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/log.hpp"
#include "torus/operators.hpp"
#include "torus/spectral.hpp"

namespace mfg {

namespace {

constexpr double kBlowUp = 1e6;

double path_gap(const std::vector<Measure>& a, const std::vector<Measure>& b) {
  double g = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) g = std::max(g, sup_distance(a[s].density(), b[s].density()));
  return g;
}

double path_gap(const std::vector<Field>& a, const std::vector<Field>& b) {
  double g = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) g = std::max(g, sup_distance(a[s], b[s]));
  return g;
}

Measure blend(const Measure& old_m, const Measure& new_m, double theta) {
  Field f = old_m.density();
  f *= 1.0 - theta;
  f.axpy(theta, new_m.density());
  return Measure::clip_and_normalize(std::move(f));
}

}  // namespace

TimeGrid SolverConfig::timegrid(double t0) const {
  const double h = dt();
  const double n = std::round((T - t0) / h);
  if (std::abs((T - t0) - n * h) > 1e-9 * std::max(1.0, std::abs(T)))
    throw InvalidArgument("start time is not on the solver time grid");
  if (n < 0) throw InvalidArgument("start time lies after the horizon");
  return TimeGrid{T - n * h, T, int(n)};
}

void SolverConfig::validate() const {
  if (!(T > 0.0)) throw ConfigError("horizon T must be positive");
  if (steps < 4) throw ConfigError("numerics.steps must be at least 4");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("picard damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
}

void check_cfl(const Model& model, const SolverConfig& cfg) {
  const double c = cfg.dt() * model.H.lipschitz() * std::sqrt(double(cfg.grid.dim())) / cfg.grid.h();
  if (c > 1.0 + 1e-12) {
    std::ostringstream os;
    os << "CFL violation: dt*L_H*sqrt(dim)/h = " << c << " > 1";
    throw CflViolation(os.str());
  }
}

VectorField MfgSolution::drift(const Model& model, int s) const { return model.H.drift(gradient(u[s])); }

std::vector<Field> solve_hjb(const std::vector<Measure>& m_path, const Model& model, const TimeGrid& tg) {
  const int S = tg.steps;
  if (int(m_path.size()) != S + 1) throw InvalidArgument("measure path length does not match the time grid");
  const double dt = tg.dt();
  std::vector<Field> u(std::size_t(S) + 1);
  u[S] = model.G(m_path[S]);
  for (int s = S - 1; s >= 0; --s) {
    Field next = u[s + 1];
    Field src = model.F(m_path[s]);
    src -= model.H.on_grid(gradient(u[s + 1]));
    next.axpy(dt, src);
    heat_step_inplace(next, dt);
    if (!(next.sup_norm() <= kBlowUp)) throw Divergence("value function exceeded the blow-up guard");
    u[s] = std::move(next);
  }
  return u;
}

std::vector<Measure> solve_fp(const std::vector<VectorField>& drifts, const Measure& m0, const TimeGrid& tg,
                              double* clipped) {
  const int S = tg.steps;
  if (int(drifts.size()) < S) throw InvalidArgument("drift path shorter than the time grid");
  const double dt = tg.dt();
  const double h = m0.grid().h();
  std::vector<Measure> m;
  m.reserve(std::size_t(S) + 1);
  m.push_back(m0);
  double lost = 0.0;
  for (int s = 0; s < S; ++s) {
    const double cfl = dt * max_axis_speed(drifts[s]) / h;
    if (cfl > 1.0 + 1e-12) throw CflViolation("CFL violation in Fokker-Planck step");
    Field next = m[s].density();
    next.axpy(dt, div_upwind_flux(m[s].density(), drifts[s]));
    heat_step_inplace(next, dt);
    double c = 0.0;
    m.push_back(Measure::clip_and_normalize(std::move(next), &c));
    lost += c;
  }
  if (clipped) *clipped = lost;
  return m;
}

std::vector<Measure> solve_fp(const std::vector<Field>& u_path, const Measure& m0, const Model& model,
                              const TimeGrid& tg, double* clipped) {
  std::vector<VectorField> b;
  b.reserve(u_path.size());
  for (int s = 0; s < tg.steps; ++s) b.push_back(model.H.drift(gradient(u_path[s])));
  return solve_fp(b, m0, tg, clipped);
}

MfgSolution solve_mfg(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg) {
  cfg.validate();
  if (!(m0.grid() == cfg.grid)) throw InvalidArgument("initial measure grid differs from solver grid");
  check_cfl(model, cfg);
  if (!model.monotone()) log::warn("coupling is not monotone; Picard iteration may fail to converge");
  MfgSolution sol;
  sol.tg = cfg.timegrid(t0);
  const int S = sol.tg.steps;
  if (S == 0) {
    sol.m = {m0};
    sol.u = {model.G(m0)};
    return sol;
  }
  const double dt = sol.tg.dt();
  // Heat flow of m0 as the starting path.
  std::vector<Measure> path{m0};
  for (int s = 0; s < S; ++s) path.push_back(Measure::clip_and_normalize(heat_step(path.back().density(), dt)));

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const std::vector<Field> u = solve_hjb(path, model, sol.tg);
    double clipped = 0.0;
    const std::vector<Measure> fresh = solve_fp(u, m0, model, sol.tg, &clipped);
    sol.clipped_mass = clipped;
    std::vector<Measure> next;
    next.reserve(path.size());
    for (std::size_t s = 0; s < path.size(); ++s) next.push_back(blend(path[s], fresh[s], cfg.theta));
    const double gap = path_gap(next, path);
    sol.gap_history.push_back(gap);
    path = std::move(next);
    sol.iterations = it;
    if (gap <= cfg.tol) {
      sol.m = std::move(path);
      sol.u = solve_hjb(sol.m, model, sol.tg);
      log::debug("solve_mfg converged in " + std::to_string(it) + " sweeps");
      return sol;
    }
  }
  throw NonConvergence("solve_mfg did not reach tolerance in " + std::to_string(cfg.max_iters) + " sweeps",
                       sol.gap_history);
}

LinearizedSolution solve_linearized(const MfgSolution& sol, int s0, const Field& mu0, const Model& model,
                                    const SolverConfig& cfg) {
  const int S = sol.steps();
  if (s0 < 0 || s0 > S) throw InvalidArgument("linearization start index out of range");
  LinearizedSolution lin;
  lin.tg = TimeGrid{sol.tg.time(s0), sol.tg.T, S - s0};
  const int n = S - s0;
  const double dt = sol.tg.dt();
  const Grid& g = mu0.grid();

  // Frozen coefficients along the trajectory.
  std::vector<VectorField> p(std::size_t(n) + 1), b(std::size_t(n) + 1);
  for (int k = 0; k <= n; ++k) {
    p[k] = gradient(sol.u[s0 + k]);
    b[k] = model.H.drift(p[k]);
  }
  auto m_at = [&](int k) -> const Field& { return sol.m[s0 + k].density(); };

  auto backward = [&](const std::vector<Field>& mu) {
    std::vector<Field> v(std::size_t(n) + 1);
    v[n] = model.G.derivative(m_at(n), mu[n]);
    for (int k = n - 1; k >= 0; --k) {
      Field next = v[k + 1];
      Field src = model.F.derivative(m_at(k), mu[k]);
      const VectorField dv = gradient(v[k + 1]);
      for (std::size_t x = 0; x < g.size(); ++x) {
        double dot = 0.0;
        for (int a = 0; a < g.dim(); ++a) dot += b[k + 1].comp[a][x] * dv.comp[a][x];
        src[x] -= dot;
      }
      next.axpy(dt, src);
      heat_step_inplace(next, dt);
      v[k] = std::move(next);
    }
    return v;
  };
  auto forward = [&](const std::vector<Field>* v) {
    std::vector<Field> mu(std::size_t(n) + 1);
    mu[0] = mu0;
    for (int k = 0; k < n; ++k) {
      Field next = mu[k];
      Field rate = div_upwind_flux(mu[k], b[k]);
      if (v) rate += div_upwind_flux_dir(m_at(k), b[k], model.H.hessian_apply(p[k], gradient((*v)[k])));
      next.axpy(dt, rate);
      heat_step_inplace(next, dt);
      mu[k + 1] = std::move(next);
    }
    return mu;
  };

  std::vector<Field> mu = forward(nullptr);
  lin.v = backward(mu);
  if (n == 0) {
    lin.mu = std::move(mu);
    return lin;
  }
  const double tol = cfg.tol * std::max(1.0, mu0.sup_norm());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const std::vector<Field> fresh = forward(&lin.v);
    std::vector<Field> next(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
      next[k] = mu[k];
      next[k] *= 1.0 - cfg.theta;
      next[k].axpy(cfg.theta, fresh[k]);
    }
    const double gap = path_gap(next, mu);
    lin.gap_history.push_back(gap);
    mu = std::move(next);
    lin.v = backward(mu);
    lin.iterations = it;
    if (gap <= tol) {
      lin.mu = std::move(mu);
      return lin;
    }
  }
  throw NonConvergence("linearized solve did not reach tolerance", lin.gap_history);
}

}  // namespace mfg
