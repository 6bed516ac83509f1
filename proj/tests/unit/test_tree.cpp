#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "common/error.hpp"
#include "noise/tree.hpp"
#include "torus/spectral.hpp"

using namespace mfg;

namespace {

SolverConfig config(int M, int S, double T) {
  SolverConfig c;
  c.grid = Grid(1, M);
  c.steps = S;
  c.T = T;
  return c;
}

Model noisy_model(const Grid& g, double beta) {
  ModelParams p;
  p.beta = beta;
  return build_model(p, g);
}

}  // namespace

TEST_CASE("without noise the tree collapses to the deterministic solver") {
  const SolverConfig cfg = config(32, 24, 0.5);
  const Model model = build_model(ModelParams{}, cfg.grid);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1);
  const MfgSolution sol = solve_mfg(0.0, m0, model, cfg);
  const TreeSolution tree = solve_tree(0.0, m0, model, cfg, 3);
  CHECK(sup_distance(tree.root_u(), sol.u.front()) <= 1e-9);
  for (const auto& node : tree.nodes) CHECK(node.shift == 0.0);
}

TEST_CASE("decoupled model: every node value vanishes") {
  const SolverConfig cfg = config(16, 12, 0.5);
  Model model = trivial_model(cfg.grid);
  model.beta = 0.5;
  const TreeSolution tree = solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), model, cfg, 3);
  for (const auto& node : tree.nodes) {
    for (const auto& u : node.u) CHECK(u.sup_norm() == 0.0);
    CHECK(node.jump.sup_norm() == 0.0);
  }
}

TEST_CASE("tree layout: heap order, shifts of plus or minus delta, sibling jumps cancel") {
  const SolverConfig cfg = config(32, 24, 0.5);
  const Model model = noisy_model(cfg.grid, 0.5);
  const TreeSolution tree = solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), model, cfg, 3);
  CHECK(tree.nodes.size() == 7);
  CHECK(tree.leaf_u.size() == 8);
  CHECK(tree.delta == doctest::Approx(std::sqrt(2 * 0.5 * 0.5 / 3)).epsilon(1e-15));
  for (std::size_t n = 1; n < tree.nodes.size(); ++n) {
    const double step = n % 2 == 1 ? -tree.delta : tree.delta;
    CHECK(tree.nodes[n].shift == doctest::Approx(tree.nodes[(n - 1) / 2].shift + step).epsilon(1e-15));
  }
  for (std::size_t n = 1; n + 1 < tree.nodes.size(); n += 2) {
    Field sum = tree.nodes[n].jump + tree.nodes[n + 1].jump;
    CHECK(sum.sup_norm() <= 1e-12);
  }
}

TEST_CASE("forward measures keep unit mass and stay nonnegative on every path") {
  const SolverConfig cfg = config(32, 24, 0.5);
  const TreeSolution tree =
      solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), noisy_model(cfg.grid, 0.5), cfg, 3);
  for (const auto& node : tree.nodes)
    for (const auto& m : node.m) {
      CHECK(m.density().integral() == doctest::Approx(1.0).epsilon(1e-12));
      for (double v : m.density().values()) CHECK(v >= 0.0);
    }
}

TEST_CASE("root value is continuous as the noise vanishes") {
  const SolverConfig cfg = config(32, 24, 0.5);
  const Measure m0 = Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1);
  const MfgSolution sol = solve_mfg(0.0, m0, build_model(ModelParams{}, cfg.grid), cfg);
  const TreeSolution tree = solve_tree(0.0, m0, noisy_model(cfg.grid, 1e-3), cfg, 3);
  CHECK(sup_distance(tree.root_u(), sol.u.front()) <= 10 * 1e-3 + 10 * cfg.tol);
}

TEST_CASE("consistency gaps of the noisy tree are small") {
  const SolverConfig cfg = config(32, 24, 0.5);
  const Model model = noisy_model(cfg.grid, 0.5);
  const TreeSolution tree = solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), model, cfg, 3);
  const auto gaps = master_consistency(tree, model, cfg);
  REQUIRE(gaps.size() == tree.nodes.size());
  CHECK(gaps.front().node == 0);
  CHECK(gaps.front().gap == 0.0);
  for (const auto& g : gaps) CHECK(g.gap <= 10 * cfg.tol + cfg.dt());
}

TEST_CASE("grid-multiple shifts: reconstruction and re-shifting recover the tree fields") {
  // delta = sqrt(2 beta T / K) = 2 h for M = 16, K = 2, T = 0.5.
  const SolverConfig cfg = config(16, 8, 0.5);
  const Model model = noisy_model(cfg.grid, 0.03125);
  const TreeSolution tree = solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), model, cfg, 2);
  REQUIRE(tree.delta == 0.125);
  const auto orig = reconstruct_original_fields(tree, model, cfg, false);
  REQUIRE(orig.size() == tree.nodes.size());
  for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
    const double a = tree.nodes[n].shift;
    CHECK(translate(orig[n].u, {-a, 0}).raw() == tree.nodes[n].u.front().raw());
    CHECK(sup_distance(translate(orig[n].m.density(), {-a, 0}), tree.nodes[n].m.front().density()) <= 1e-14);
  }
}

TEST_CASE("uniform measure without potential: v is spatially constant") {
  const SolverConfig cfg = config(16, 8, 0.5);
  ModelParams p;
  p.eps = 0.0;
  p.beta = 0.5;
  const Model model = build_model(p, cfg.grid);
  const TreeSolution tree = solve_tree(0.0, Measure::uniform(cfg.grid), model, cfg, 2);
  for (const auto& f : reconstruct_original_fields(tree, model, cfg)) {
    CHECK(std::isfinite(f.v.sup_norm()));
    CHECK(f.v.sup_norm() - std::abs(f.v.mean()) <= 1e-8);
    double lo = f.v[0], hi = f.v[0];
    for (double x : f.v.values()) lo = std::min(lo, x), hi = std::max(hi, x);
    CHECK(hi - lo <= 1e-8);
  }
}

TEST_CASE("tree budget and dimension limits") {
  const SolverConfig cfg = config(16, 8, 0.5);
  const Measure m0 = Measure::uniform(cfg.grid);
  CHECK_THROWS_AS(solve_tree(0.0, m0, noisy_model(cfg.grid, 0.5), cfg, 3), InvalidArgument);  // 8 % 3
  SolverConfig two = cfg;
  two.grid = Grid(2, 16);
  CHECK_THROWS_AS(solve_tree(0.0, Measure::uniform(two.grid), noisy_model(two.grid, 0.5), two, 2), CapabilityError);
}

TEST_CASE("tree bundle roundtrip") {
  const SolverConfig cfg = config(16, 8, 0.5);
  const TreeSolution tree =
      solve_tree(0.0, Measure::wrapped_gaussian(cfg.grid, {0.3, 0}, 0.1), noisy_model(cfg.grid, 0.5), cfg, 2);
  const auto dir = std::filesystem::temp_directory_path();
  write_tree(dir, "mfglab_tree_roundtrip", tree, "0123456789abcdef");
  const TreeSolution back = read_tree(dir, "mfglab_tree_roundtrip");
  REQUIRE(back.nodes.size() == tree.nodes.size());
  CHECK(back.K == tree.K);
  CHECK(back.delta == tree.delta);
  for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
    CHECK(back.nodes[n].shift == tree.nodes[n].shift);
    REQUIRE(back.nodes[n].u.size() == tree.nodes[n].u.size());
    for (std::size_t s = 0; s < tree.nodes[n].u.size(); ++s) CHECK(back.nodes[n].u[s].raw() == tree.nodes[n].u[s].raw());
    CHECK(sup_distance(back.nodes[n].jump, tree.nodes[n].jump) == 0.0);
  }
  for (std::size_t l = 0; l < tree.leaf_u.size(); ++l) CHECK(back.leaf_u[l].raw() == tree.leaf_u[l].raw());
  for (const char* f : {"mfglab_tree_roundtrip.json", "mfglab_tree_roundtrip_u.bin", "mfglab_tree_roundtrip_m.bin"})
    std::filesystem::remove(dir / f);
}
