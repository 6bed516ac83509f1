#include <doctest.h>

#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "master/master.hpp"
#include "master/potential.hpp"

using namespace mfg;

namespace {

SolverConfig config(int M, int S, double T) {
  SolverConfig c;
  c.grid = Grid(1, M);
  c.steps = S;
  c.T = T;
  return c;
}

Model constant_hamiltonian(const Grid& g, double c) {
  ModelParams p;
  p.hamiltonian = "constant";
  p.h_constant = c;
  p.eps = 0.0;
  p.coupling = "zero";
  return build_model(p, g);
}

}  // namespace

TEST_CASE("master field at the start of a solve equals the MFG value function") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const MfgSolution sol = solve_mfg(0.0, m0, model, cfg);
  const Field U = evaluate_U(0.0, m0, model, cfg);
  CHECK(sup_distance(U, sol.u.front()) == 0.0);
}

TEST_CASE("constant Hamiltonian without coupling: U = c (T - t) and the master residual vanishes") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const double c = 0.7;
  const Model model = constant_hamiltonian(cfg.grid, c);
  const Measure m = Measure::wrapped_gaussian(cfg.grid, {0.2, 0}, 0.1);
  const Field U = evaluate_U(0.125, m, model, cfg);
  for (std::size_t x = 0; x < U.size(); ++x) CHECK(U[x] == doctest::Approx(-c * (0.5 - 0.125)).epsilon(1e-12));
  const auto rep = master_residual({{0.25, {0.5, 0}, m}}, model, cfg);
  CHECK(rep.max_abs <= 1e-10);
}

TEST_CASE("Taylor remainder of identical measures is zero") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  CHECK(taylor_check(0.0, m0, m0, model, cfg) == 0.0);
}

TEST_CASE("Taylor remainder scales like d1 squared") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const DerivativeKernel k = derivative_kernel(0.0, m0, model, cfg);
  const Field U0 = evaluate_U(0.0, m0, model, cfg);
  double prev = 0.0;
  for (double s : {0.2, 0.1, 0.05}) {
    Field f = m0.density();
    f *= 1 - s;
    for (double& v : f.values()) v += s;
    const double q = taylor_check(k, U0, Measure(f), model, cfg);
    CHECK(q > 0.0);
    if (prev > 0.0) CHECK(q / prev < 2.0);
    prev = q;
  }
}

TEST_CASE("flow consistency of the decoupled problem is exact") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = trivial_model(cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  CHECK(flow_consistency(0.0, m0, 0.25, model, cfg) == 0.0);
}

TEST_CASE("flow consistency: re-based solve sits at the Picard floor") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  CHECK(flow_consistency(0.0, m0, 0.25, model, cfg) <= 10 * cfg.tol + cfg.dt());
}

TEST_CASE("vector-field derivative matches the kernel pairing") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const DerivativeKernel k = derivative_kernel(0.0, m0, model, cfg);
  VectorField phi(cfg.grid);
  for (std::size_t n = 0; n < cfg.grid.size(); ++n)
    phi.comp[0][n] = std::sin(2 * std::numbers::pi * cfg.grid.coord(n)[0]);
  const double h = 0.25 * cfg.grid.h();
  const double err = vector_field_derivative_check(k, phi, h, model, cfg);
  // Against the size of the pairing itself.
  CHECK(err < 0.05 * std::max(1e-3, k.pair(m0.density()).sup_norm() + 1e-3));
}

TEST_CASE("Fenchel identity: duality value equals the direct control cost") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const MfgSolution sol = solve_mfg(0.0, m0, model, cfg);
  const double direct = control_cost(sol.m, mfg_control(sol, model), model, sol.tg);
  CHECK(duality_value(sol, model) == doctest::Approx(direct).epsilon(1e-10));
  CHECK(potential_value(0.0, m0, model, cfg) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("control cost rejects a measure path off the Fokker-Planck constraint") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const MfgSolution sol = solve_mfg(0.0, m0, model, cfg);
  std::vector<Measure> m = sol.m;
  m[5] = Measure::uniform(cfg.grid);
  CHECK_THROWS_AS(control_cost(m, mfg_control(sol, model), model, sol.tg), InvalidArgument);
}

TEST_CASE("perturbed controls never beat the MFG control and the gap is quadratic") {
  const SolverConfig cfg = config(32, 40, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1);
  const OptimalityReport rep = optimality_check(0.0, m0, model, cfg, 5, 0.05, 3);
  REQUIRE(rep.gaps.size() == 5);
  CHECK(rep.min_gap >= -1e-10);
  CHECK(rep.min_ratio > 3.0);
  CHECK(rep.max_ratio < 5.0);
}

TEST_CASE("measure-space HJB residual of the control value is first order") {
  double prev = 0.0;
  for (int lev = 0; lev < 2; ++lev) {
    const SolverConfig cfg = config(32 << lev, 40 << lev, 0.5);
    const Model m = build_model(ModelParams{}, cfg.grid);
    const double r = hjb_measure_residual(0.25, Measure::wrapped_gaussian(cfg.grid, {0.4, 0}, 0.1), m, cfg);
    if (lev == 1) CHECK(r < prev);
    prev = r;
  }
}
