#include <doctest.h>

#include <cmath>
#include <memory>

#include "common/error.hpp"
#include "particle/particle.hpp"

using namespace mfg;

namespace {

SolverConfig config(int M, int S, double T) {
  SolverConfig c;
  c.grid = Grid(1, M);
  c.steps = S;
  c.T = T;
  return c;
}

struct Setup {
  SolverConfig cfg;
  Model model;
  MfgSolution sol;
  Setup(int M, int S, double T, const ModelParams& p = {}) : cfg(config(M, S, T)), model(build_model(p, cfg.grid)) {
    sol = solve_mfg(0.0, Measure::wrapped_gaussian(cfg.grid, {0.5, 0}, 0.1), model, cfg);
  }
};

ParticleConfig small_pc(std::uint64_t seed = 1) {
  ParticleConfig pc;
  pc.n_mc = 20;
  pc.seed = seed;
  return pc;
}

}  // namespace

TEST_CASE("mean-field feedback drives Y exactly like X") {
  const Setup s(16, 16, 0.25);
  const ChaosRow r = simulate_pair(MeanFieldFeedback(4, s.sol), s.sol, s.model, small_pc());
  CHECK(r.gap == 0.0);
  CHECK(r.gap_stderr == 0.0);
}

TEST_CASE("decoupled model: Nash and McKean-Vlasov particles coincide") {
  const SolverConfig cfg = config(16, 16, 0.25);
  const Model model = trivial_model(cfg.grid);
  const MfgSolution sol = solve_mfg(0.0, Measure::wrapped_gaussian(cfg.grid, {0.5, 0}, 0.1), model, cfg);
  const auto path = build_kernel_path(sol, model, cfg);
  const ChaosRow r = simulate_pair(ProjectedMasterFeedback(3, path), sol, model, small_pc());
  CHECK(r.gap == 0.0);
}

TEST_CASE("projected feedback is invariant under relabelling the players") {
  const Setup s(16, 16, 0.25);
  const auto path = build_kernel_path(s.sol, s.model, s.cfg);
  const ProjectedMasterFeedback fb(4, path);
  const double y[] = {0.11, 0.52, 0.73, 0.9};
  const double others_permuted[] = {0.11, 0.9, 0.52, 0.73};
  const double swapped[] = {0.73, 0.52, 0.11, 0.9};
  CHECK(fb.own_gradient(5, 0, y) == doctest::Approx(fb.own_gradient(5, 0, others_permuted)).epsilon(1e-14));
  CHECK(fb.own_gradient(5, 2, y) == doctest::Approx(fb.own_gradient(5, 0, swapped)).epsilon(1e-14));
}

TEST_CASE("tensor and projected feedbacks give comparable gaps for small N") {
  const Setup s(16, 16, 0.25);
  const auto path = build_kernel_path(s.sol, s.model, s.cfg);
  ParticleConfig pc = small_pc(3);
  pc.n_mc = 100;
  const NashTensor t = solve_nash(2, s.model, s.cfg, true);
  const ChaosRow a = simulate_pair(TensorFeedback(t), s.sol, s.model, pc);
  const ChaosRow b = simulate_pair(ProjectedMasterFeedback(2, path), s.sol, s.model, pc);
  CHECK(a.gap > 0.0);
  CHECK(std::abs(a.gap - b.gap) <= 0.3 * a.gap + 2 * (a.gap_stderr + b.gap_stderr));
}

TEST_CASE("SDE steps stay within the upwind limit and align with PDE levels") {
  const Setup s(16, 8, 0.25);
  const double dts = sde_step(s.model, s.sol);
  const double ratio = s.sol.tg.dt() / dts;
  CHECK(ratio == doctest::Approx(std::round(ratio)).epsilon(1e-12));
  CHECK(dts * s.model.H.lipschitz() <= 0.5 * s.cfg.grid.h() + 1e-15);
  CHECK(sde_step(s.model, s.sol, 1) == doctest::Approx(dts / 2).epsilon(1e-15));
}

TEST_CASE("same seed reproduces a row bitwise, a new seed changes it") {
  const Setup s(16, 16, 0.25);
  const auto path = build_kernel_path(s.sol, s.model, s.cfg);
  const ProjectedMasterFeedback fb(3, path);
  const ChaosRow a = simulate_pair(fb, s.sol, s.model, small_pc(7));
  ParticleConfig threaded = small_pc(7);
  threaded.threads = 3;
  const ChaosRow b = simulate_pair(fb, s.sol, s.model, threaded);
  const ChaosRow c = simulate_pair(fb, s.sol, s.model, small_pc(8));
  CHECK(a.gap == b.gap);
  CHECK(a.law_gap == b.law_gap);
  CHECK(a.gap != c.gap);
}

TEST_CASE("empirical law gap: all nodes against the uniform flow is zero, one node is a quarter") {
  const SolverConfig cfg = config(16, 8, 0.25);
  const Model model = trivial_model(cfg.grid);
  const MfgSolution sol = solve_mfg(0.0, Measure::uniform(cfg.grid), model, cfg);
  std::vector<double> nodes;
  for (int k = 0; k < 16; ++k) nodes.push_back(k * cfg.grid.h());
  const std::vector<std::vector<double>> spread(9, nodes);
  CHECK(empirical_law_gap(spread, sol) <= 1e-14);
  const std::vector<std::vector<double>> clumped(9, std::vector<double>(5, 3 * cfg.grid.h()));
  CHECK(empirical_law_gap(clumped, sol) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("particle pairs refuse common noise") {
  ModelParams p;
  p.beta = 0.3;
  const Setup s(16, 16, 0.25);
  const Model noisy = build_model(p, s.cfg.grid);
  CHECK_THROWS_AS(simulate_pair(MeanFieldFeedback(2, s.sol), s.sol, noisy, small_pc()), CapabilityError);
}
