#include "noise/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "common/error.hpp"
#include "common/log.hpp"
#include "json.hpp"
#include "mfg/kernel.hpp"
#include "torus/operators.hpp"
#include "torus/snapshot.hpp"
#include "torus/spectral.hpp"

namespace mfg {

namespace {

// C~(x, m~) = C(x + a, (id + a) # m~).
Field shifted_coupling(const Coupling& C, const Measure& m, double a) {
  if (a == 0.0) return C(m);
  const Field pushed = translate(m.density(), {a, 0.0});
  return translate(C(pushed), {-a, 0.0});
}

Field shifted_hamiltonian(const Hamiltonian& H, const Field& u, double a) {
  const Grid& g = u.grid();
  const Field p = gradient(u).comp[0];
  Field out(g);
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = H.H({g.coord(n)[0] + a, 0.0}, {p[n], 0.0});
  return out;
}

VectorField shifted_drift(const Hamiltonian& H, const Field& u, double a) {
  const Grid& g = u.grid();
  const Field p = gradient(u).comp[0];
  VectorField b(g);
  for (std::size_t n = 0; n < g.size(); ++n) b.comp[0][n] = H.DpH({g.coord(n)[0] + a, 0.0}, {p[n], 0.0})[0];
  return b;
}

Measure blend(const Measure& old_m, const Measure& new_m, double theta) {
  Field f = old_m.density();
  f *= 1.0 - theta;
  f.axpy(theta, new_m.density());
  return Measure::clip_and_normalize(std::move(f));
}

int level_of(std::size_t n) {
  int k = 0;
  while ((std::size_t(2) << k) - 1 <= n) ++k;
  return k;
}

}  // namespace

TreeSolution solve_tree(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg, int K,
                        double base_shift) {
  cfg.validate();
  const Grid& g = model.grid();
  if (g.dim() != 1) throw CapabilityError("the common-noise tree supports dimension 1 only");
  if (model.beta < 0.0) throw InvalidArgument("beta must be nonnegative");
  if (K < 1) throw InvalidArgument("the tree needs at least one level");
  check_cfl(model, cfg);
  const TimeGrid tg = cfg.timegrid(t0);
  if (tg.steps % K != 0)
    throw InvalidArgument("fine steps (" + std::to_string(tg.steps) + ") must be a multiple of K = " +
                          std::to_string(K));
  const int nf = tg.steps / K;
  const double budget = std::ldexp(double(nf + 1) * double(g.size()), K);
  if (K > 16 || budget > double(std::size_t(1) << 26))
    throw BudgetExceeded("tree with K = " + std::to_string(K) + " exceeds the memory budget");

  TreeSolution tree;
  tree.t0 = tg.t0;
  tree.T = tg.T;
  tree.beta = model.beta;
  tree.K = K;
  tree.substeps = nf;
  tree.delta = std::sqrt(2.0 * model.beta * (tg.T - tg.t0) / K);
  const double dt = tg.dt();
  const std::size_t n_nodes = (std::size_t(1) << K) - 1;
  const std::size_t n_leaves = std::size_t(1) << K;
  tree.nodes.resize(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    TreeNode& node = tree.nodes[n];
    node.level = level_of(n);
    node.t_start = tg.time(node.level * nf);
    node.t_end = tg.time((node.level + 1) * nf);
    node.shift = n == 0 ? base_shift : tree.nodes[(n - 1) / 2].shift + (n % 2 == 1 ? -tree.delta : tree.delta);
  }
  tree.leaf_shift.resize(n_leaves);
  for (std::size_t l = 0; l < n_leaves; ++l) {
    const std::size_t parent = (l + n_nodes - 1) / 2;
    tree.leaf_shift[l] = tree.nodes[parent].shift + (l % 2 == 0 ? -tree.delta : tree.delta);
  }
  auto start_of = [&](std::size_t n, const std::vector<std::vector<Measure>>& paths) -> const Measure& {
    return n == 0 ? m0 : paths[(n - 1) / 2].back();
  };

  // Initial guess: heat flow of m0 along every path.
  std::vector<std::vector<Measure>> paths(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    paths[n] = {start_of(n, paths)};
    for (int s = 0; s < nf; ++s) paths[n].push_back(Measure::clip_and_normalize(heat_step(paths[n].back().density(), dt)));
  }

  auto backward = [&](const std::vector<std::vector<Measure>>& mp) {
    std::vector<Field> leaf(n_leaves);
    for (std::size_t l = 0; l < n_leaves; ++l)
      leaf[l] = shifted_coupling(model.G, mp[(l + n_nodes - 1) / 2].back(), tree.leaf_shift[l]);
    std::vector<std::vector<Field>> u(n_nodes);
    for (std::size_t n = n_nodes; n-- > 0;) {
      const double a = tree.nodes[n].shift;
      const std::size_t c1 = 2 * n + 1, c2 = 2 * n + 2;
      const Field& v1 = c1 < n_nodes ? u[c1].front() : leaf[c1 - n_nodes];
      const Field& v2 = c2 < n_nodes ? u[c2].front() : leaf[c2 - n_nodes];
      u[n].resize(std::size_t(nf) + 1);
      Field end = v1;
      end += v2;
      end *= 0.5;
      u[n][std::size_t(nf)] = std::move(end);
      for (int s = nf - 1; s >= 0; --s) {
        Field next = u[n][std::size_t(s) + 1];
        Field src = shifted_coupling(model.F, mp[n][std::size_t(s)], a);
        src -= shifted_hamiltonian(model.H, next, a);
        next.axpy(dt, src);
        heat_step_inplace(next, dt);
        if (!(next.sup_norm() <= 1e6)) throw Divergence("tree value function exceeded the blow-up guard");
        u[n][std::size_t(s)] = std::move(next);
      }
    }
    return std::make_pair(std::move(u), std::move(leaf));
  };

  auto forward = [&](const std::vector<std::vector<Field>>& u) {
    std::vector<std::vector<Measure>> fresh(n_nodes);
    const double h = g.h();
    for (std::size_t n = 0; n < n_nodes; ++n) {
      const double a = tree.nodes[n].shift;
      fresh[n] = {start_of(n, fresh)};
      for (int s = 0; s < nf; ++s) {
        const VectorField b = shifted_drift(model.H, u[n][std::size_t(s)], a);
        if (dt * max_axis_speed(b) / h > 1.0 + 1e-12) throw CflViolation("CFL violation in tree Fokker-Planck step");
        Field next = fresh[n].back().density();
        next.axpy(dt, div_upwind_flux(fresh[n].back().density(), b));
        heat_step_inplace(next, dt);
        fresh[n].push_back(Measure::clip_and_normalize(std::move(next)));
      }
    }
    return fresh;
  };

  for (int it = 1; it <= cfg.max_iters; ++it) {
    auto [u, leaf] = backward(paths);
    const auto fresh = forward(u);
    double gap = 0.0;
    for (std::size_t n = 0; n < n_nodes; ++n)
      for (std::size_t s = 0; s < paths[n].size(); ++s) {
        Measure b = blend(paths[n][s], fresh[n][s], cfg.theta);
        gap = std::max(gap, sup_distance(b.density(), paths[n][s].density()));
        paths[n][s] = std::move(b);
      }
    tree.gap_history.push_back(gap);
    tree.iterations = it;
    if (gap <= cfg.tol) {
      auto [uf, leaf_f] = backward(paths);
      for (std::size_t n = 0; n < n_nodes; ++n) {
        TreeNode& node = tree.nodes[n];
        node.u = std::move(uf[n]);
        node.m = std::move(paths[n]);
      }
      tree.leaf_u = std::move(leaf_f);
      for (std::size_t n = 0; n < n_nodes; ++n) {
        TreeNode& node = tree.nodes[n];
        node.jump = Field(g, 0.0);
        if (n > 0) node.jump = node.u.front() - tree.nodes[(n - 1) / 2].u.back();
      }
      log::debug("solve_tree converged in " + std::to_string(it) + " sweeps");
      return tree;
    }
  }
  throw NonConvergence("solve_tree did not reach tolerance in " + std::to_string(cfg.max_iters) + " sweeps",
                       tree.gap_history);
}

std::vector<NodeGap> master_consistency(const TreeSolution& tree, const Model& model, const SolverConfig& cfg) {
  std::vector<NodeGap> out;
  out.push_back({0, 0, tree.t0, 0.0});
  for (std::size_t n = 1; n < tree.nodes.size(); ++n) {
    const TreeNode& node = tree.nodes[n];
    const Measure pushed = Measure::clip_and_normalize(translate(node.m.front().density(), {node.shift, 0.0}));
    const TreeSolution sub = solve_tree(node.t_start, pushed, model, cfg, tree.K - node.level, 0.0);
    const Field rebased = translate(sub.root_u(), {-node.shift, 0.0});
    out.push_back({int(n), node.level, node.t_start, sup_distance(rebased, node.u.front())});
  }
  return out;
}

std::vector<OriginalFields> reconstruct_original_fields(const TreeSolution& tree, const Model& model,
                                                        const SolverConfig& cfg, bool with_v) {
  std::vector<OriginalFields> out;
  out.reserve(tree.nodes.size());
  Model plain = model;
  plain.beta = 0.0;
  for (const TreeNode& node : tree.nodes) {
    OriginalFields f;
    f.u = translate(node.u.front(), {node.shift, 0.0});
    f.m = Measure::clip_and_normalize(translate(node.m.front().density(), {node.shift, 0.0}));
    f.v = Field(f.u.grid(), 0.0);
    if (with_v) {
      const DerivativeKernel K = derivative_kernel(node.t_start, f.m, plain, cfg);
      const auto DK = K.intrinsic();
      const std::size_t n = K.n();
      const double h = f.u.grid().h();
      for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) acc += DK[0][x * n + y] * f.m[y];
        f.v[x] = acc * h;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace mfg

namespace mfg {

void write_tree(const std::filesystem::path& dir, const std::string& stem, const TreeSolution& tree,
                const std::string& config_hash) {
  nlohmann::json topo = {{"config_hash", config_hash}, {"t0", tree.t0},          {"T", tree.T},
                         {"beta", tree.beta},          {"K", tree.K},            {"substeps", tree.substeps},
                         {"delta", tree.delta},        {"iterations", tree.iterations}};
  std::vector<Field> us, ms;
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
    const TreeNode& node = tree.nodes[n];
    nodes.push_back({{"index", n},
                     {"level", node.level},
                     {"t_start", node.t_start},
                     {"t_end", node.t_end},
                     {"shift", node.shift},
                     {"offset", us.size()},
                     {"slices", node.u.size()},
                     {"children", {2 * n + 1, 2 * n + 2}}});
    us.insert(us.end(), node.u.begin(), node.u.end());
    for (const auto& m : node.m) ms.push_back(m.density());
  }
  topo["nodes"] = nodes;
  topo["leaf_offset"] = us.size();
  topo["leaf_shift"] = tree.leaf_shift;
  us.insert(us.end(), tree.leaf_u.begin(), tree.leaf_u.end());
  write_snapshots((dir / (stem + "_u.bin")).string(), us);
  write_snapshots((dir / (stem + "_m.bin")).string(), ms);
  std::ofstream out(dir / (stem + ".json"));
  if (!out) throw IoError("cannot write tree topology");
  out << topo.dump(2) << '\n';
}

TreeSolution read_tree(const std::filesystem::path& dir, const std::string& stem) {
  std::ifstream in(dir / (stem + ".json"));
  if (!in) throw IoError("cannot read tree topology");
  nlohmann::json topo;
  try {
    in >> topo;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed tree topology: ") + e.what());
  }
  const auto us = read_snapshots((dir / (stem + "_u.bin")).string());
  const auto ms = read_snapshots((dir / (stem + "_m.bin")).string());
  TreeSolution t;
  t.t0 = topo.at("t0");
  t.T = topo.at("T");
  t.beta = topo.at("beta");
  t.K = topo.at("K");
  t.substeps = topo.at("substeps");
  t.delta = topo.at("delta");
  t.iterations = topo.at("iterations");
  for (const auto& j : topo.at("nodes")) {
    TreeNode node;
    node.level = j.at("level");
    node.t_start = j.at("t_start");
    node.t_end = j.at("t_end");
    node.shift = j.at("shift");
    const std::size_t off = j.at("offset"), k = j.at("slices");
    if (off + k > us.size() || off + k > ms.size()) throw IoError("tree bundle shorter than its topology");
    node.u.assign(us.begin() + std::ptrdiff_t(off), us.begin() + std::ptrdiff_t(off + k));
    for (std::size_t s = off; s < off + k; ++s) node.m.push_back(Measure::clip_and_normalize(ms[s]));
    t.nodes.push_back(std::move(node));
  }
  const std::size_t leaf = topo.at("leaf_offset");
  t.leaf_shift = topo.at("leaf_shift").get<std::vector<double>>();
  t.leaf_u.assign(us.begin() + std::ptrdiff_t(leaf), us.end());
  for (std::size_t n = 0; n < t.nodes.size(); ++n) {
    TreeNode& node = t.nodes[n];
    node.jump = n == 0 ? Field(node.u.front().grid()) : node.u.front() - t.nodes[(n - 1) / 2].u.back();
  }
  return t;
}

}  // namespace mfg
