#include "nash/nash.hpp"

#include <algorithm>
#include <fstream>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "mfg/kernel.hpp"
#include "torus/operators.hpp"
#include "torus/spectral.hpp"

namespace mfg {

TupleIndex::TupleIndex(int N, int M) : N_(N), M_(M) {
  if (N < 1) throw InvalidArgument("need at least one player");
  double est = std::pow(double(M), double(N));
  if (est > double(kNashBudget))
    throw BudgetExceeded("tensor M^N = " + std::to_string(M) + "^" + std::to_string(N) + " exceeds 2^24 entries");
  strides_.assign(static_cast<std::size_t>(N), 1);
  for (int j = N - 2; j >= 0; --j) strides_[std::size_t(j)] = strides_[std::size_t(j) + 1] * std::size_t(M);
  size_ = strides_[0] * std::size_t(M);
}

std::size_t TupleIndex::flat(std::span<const int> k) const {
  std::size_t n = 0;
  for (int j = 0; j < N_; ++j) n += std::size_t(Grid::wrap(k[std::size_t(j)], M_)) * strides_[std::size_t(j)];
  return n;
}

void TupleIndex::unflat(std::size_t n, std::span<int> k) const {
  for (int j = 0; j < N_; ++j) k[std::size_t(j)] = coord(n, j);
}

std::size_t TupleIndex::neighbour(std::size_t n, int j, int dir) const {
  const std::size_t s = strides_[std::size_t(j)];
  const int c = coord(n, j);
  if (dir > 0) return c == M_ - 1 ? n - std::size_t(M_ - 1) * s : n + s;
  return c == 0 ? n + std::size_t(M_ - 1) * s : n - s;
}

namespace {

// C(x_i, m^{N,i}_x) for every tuple and every player, using
// (rho * m^{N,i})(z) = (sum_j rho(z - x_j) - rho(z - x_i)) / (N - 1).
std::vector<std::vector<double>> coupling_tensor(const Coupling& c, const TupleIndex& idx, int threads) {
  const int N = idx.players();
  const int M = idx.points();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(N), std::vector<double>(idx.size(), 0.0));
  if (c.is_zero()) return out;
  const Field& rho = c.rho();
  const double h = c.grid().h();
  const double share = N > 1 ? 1.0 / (N - 1) : 0.0;
  const std::size_t block = 4096;
  const std::size_t nblocks = (idx.size() + block - 1) / block;
  parallel_for(nblocks, threads, [&](std::size_t b) {
    std::vector<int> k(static_cast<std::size_t>(N));
    std::vector<double> total(static_cast<std::size_t>(M));
    const std::size_t end = std::min(idx.size(), (b + 1) * block);
    for (std::size_t n = b * block; n < end; ++n) {
      idx.unflat(n, k);
      std::fill(total.begin(), total.end(), 0.0);
      for (int j = 0; j < N; ++j)
        for (int z = 0; z < M; ++z) total[std::size_t(z)] += rho[std::size_t(Grid::wrap(z - k[std::size_t(j)], M))];
      for (int i = 0; i < N; ++i) {
        const int xi = k[std::size_t(i)];
        double acc = 0.0;
        for (int z = 0; z < M; ++z) {
          const double r = rho[std::size_t(Grid::wrap(xi - z, M))];
          if (r == 0.0) continue;
          const double theta = share * (total[std::size_t(z)] - rho[std::size_t(Grid::wrap(z - xi, M))]);
          acc += r * c.phi(theta);
        }
        out[std::size_t(i)][n] = c.kappa() * acc * h;
      }
    }
  });
  return out;
}

double axis_gradient(const std::vector<double>& v, const TupleIndex& idx, std::size_t n, int j, double inv2h) {
  return (v[idx.neighbour(n, j, +1)] - v[idx.neighbour(n, j, -1)]) * inv2h;
}

}  // namespace

NashTensor solve_nash(int N, const Model& model, const SolverConfig& cfg, bool keep_feedback) {
  cfg.validate();
  const Grid& g = model.grid();
  if (g.dim() != 1) throw CapabilityError("the Nash solver supports dimension 1 only");
  if (N < 2) throw InvalidArgument("the Nash system needs N >= 2 players");
  check_cfl(model, cfg);

  NashTensor t;
  t.N = N;
  t.grid = g;
  t.tg = cfg.timegrid(0.0);
  t.beta = model.beta;
  t.index = TupleIndex(N, g.points());
  const TupleIndex& idx = t.index;
  const std::size_t size = idx.size();
  const int M = g.points();
  const double h = g.h();
  const double dt = t.tg.dt();
  const double inv2h = 0.5 / h;
  const Hamiltonian& H = model.H;

  const auto Fi = coupling_tensor(model.F, idx, cfg.threads);
  std::vector<std::vector<double>> v = coupling_tensor(model.G, idx, cfg.threads);
  t.vT = v;

  const std::vector<double> symbol = spectral::heat_symbol(N, M, dt, model.beta);
  std::vector<std::vector<double>> drift(static_cast<std::size_t>(N), std::vector<double>(size));
  std::vector<double> own;
  if (keep_feedback) t.own_gradient.resize(std::size_t(t.tg.steps) + 1);

  const std::size_t block = 4096;
  const std::size_t nblocks = (size + block - 1) / block;
  auto store_own = [&](int s) {
    if (!keep_feedback) return;
    own.assign(size, 0.0);
    parallel_for(nblocks, cfg.threads, [&](std::size_t b) {
      const std::size_t end = std::min(size, (b + 1) * block);
      for (std::size_t n = b * block; n < end; ++n) own[n] = axis_gradient(v[0], idx, n, 0, inv2h);
    });
    t.own_gradient[std::size_t(s)] = own;
  };
  store_own(t.tg.steps);

  for (int s = t.tg.steps - 1; s >= 0; --s) {
    parallel_for(nblocks, cfg.threads, [&](std::size_t b) {
      const std::size_t end = std::min(size, (b + 1) * block);
      for (std::size_t n = b * block; n < end; ++n)
        for (int j = 0; j < N; ++j) {
          const Vec x{idx.coord(n, j) * h, 0.0};
          const Vec p{axis_gradient(v[std::size_t(j)], idx, n, j, inv2h), 0.0};
          drift[std::size_t(j)][n] = H.DpH(x, p)[0];
        }
    });
    for (int i = 0; i < N; ++i) {
      std::vector<double>& vi = v[std::size_t(i)];
      std::vector<double> next(size);
      parallel_for(nblocks, cfg.threads, [&](std::size_t b) {
        const std::size_t end = std::min(size, (b + 1) * block);
        for (std::size_t n = b * block; n < end; ++n) {
          const Vec x{idx.coord(n, i) * h, 0.0};
          const Vec p{axis_gradient(vi, idx, n, i, inv2h), 0.0};
          double cross = 0.0;
          for (int j = 0; j < N; ++j)
            if (j != i) cross += drift[std::size_t(j)][n] * axis_gradient(vi, idx, n, j, inv2h);
          next[n] = vi[n] + dt * (Fi[std::size_t(i)][n] - H.H(x, p) - cross);
        }
      });
      spectral::apply_real_symbol(next, N, M, symbol);
      vi = std::move(next);
    }
    for (const auto& vi : v)
      for (std::size_t n = 0; n < size; n += 97)
        if (!std::isfinite(vi[n]) || std::abs(vi[n]) > 1e6) throw Divergence("Nash values blew up");
    store_own(s);
  }
  t.v0 = std::move(v);
  return t;
}

double NashTensor::feedback(int s, int i, std::span<const double> y) const {
  if (own_gradient.empty()) throw InvalidArgument("Nash tensor was solved without feedback history");
  const auto& G = own_gradient.at(std::size_t(s));
  const int M = grid.points();
  // Exchangeability: D_{x_i} v^i(y) = D_{x_1} v^1(y with y_1 and y_i swapped).
  std::vector<double> z(y.begin(), y.end());
  std::swap(z[0], z[std::size_t(i)]);
  std::vector<int> base(static_cast<std::size_t>(N));
  std::vector<double> frac(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const double pos = (z[std::size_t(j)] - std::floor(z[std::size_t(j)])) * M;
    const double fl = std::floor(pos);
    base[std::size_t(j)] = int(fl) % M;
    frac[std::size_t(j)] = pos - fl;
  }
  std::vector<int> k(static_cast<std::size_t>(N));
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t(1) << N); ++corner) {
    double w = 1.0;
    for (int j = 0; j < N; ++j) {
      const bool up = (corner >> j) & 1U;
      w *= up ? frac[std::size_t(j)] : 1.0 - frac[std::size_t(j)];
      k[std::size_t(j)] = base[std::size_t(j)] + (up ? 1 : 0);
    }
    if (w != 0.0) acc += w * G[index.flat(k)];
  }
  return acc;
}

double exchangeability_defect(const NashTensor& t, int n_perms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int N = t.N;
  std::vector<int> perm(static_cast<std::size_t>(N)), k(static_cast<std::size_t>(N)), kp(static_cast<std::size_t>(N));
  double worst = 0.0;
  for (int r = 0; r < n_perms; ++r) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t n = 0; n < t.index.size(); ++n) {
      t.index.unflat(n, k);
      // (x o pi^-1)_{pi(j)} = x_j
      for (int j = 0; j < N; ++j) kp[std::size_t(perm[std::size_t(j)])] = k[std::size_t(j)];
      const std::size_t np = t.index.flat(kp);
      for (int i = 0; i < N; ++i)
        worst = std::max(worst, std::abs(t.v0[std::size_t(perm[std::size_t(i)])][np] - t.v0[std::size_t(i)][n]));
    }
  }
  return worst;
}

Measure empirical_measure(const Grid& g, std::span<const int> atoms) {
  if (atoms.empty()) throw InvalidArgument("empirical measure needs at least one atom");
  Field f(g, 0.0);
  const double w = 1.0 / (double(atoms.size()) * g.cell_volume());
  for (int a : atoms) f[g.index(a)] += w;
  return Measure(std::move(f));
}

const Field& MasterCache::U(std::vector<int> atoms) {
  std::sort(atoms.begin(), atoms.end());
  auto it = std::lower_bound(cache_.begin(), cache_.end(), atoms,
                             [](const auto& e, const std::vector<int>& key) { return e.first < key; });
  if (it != cache_.end() && it->first == atoms) return it->second;
  const Measure m = empirical_measure(model_.grid(), atoms);
  SolverConfig c = cfg_;
  c.threads = 1;
  Field u = solve_mfg(t0_, m, model_, c).u.front();
  it = cache_.emplace(it, std::move(atoms), std::move(u));
  return it->second;
}

NashMasterError nash_vs_master_error(const NashTensor& t, const Model& model, const SolverConfig& cfg,
                                     std::span<const std::size_t> tuples) {
  const int N = t.N;
  MasterCache cache(model, cfg, t.tg.t0);
  NashMasterError out;
  std::vector<int> k(static_cast<std::size_t>(N));
  auto visit = [&](std::size_t n) {
    t.index.unflat(n, k);
    const Field& Ufull = cache.U(k);
    double e_full = 0.0, e_excl = 0.0;
    for (int i = 0; i < N; ++i) {
      const double vi = t.v0[std::size_t(i)][n];
      e_full += std::abs(vi - Ufull[std::size_t(k[std::size_t(i)])]);
      std::vector<int> others;
      for (int j = 0; j < N; ++j)
        if (j != i) others.push_back(k[std::size_t(j)]);
      const Field& Uex = cache.U(others);
      e_excl += std::abs(vi - Uex[std::size_t(k[std::size_t(i)])]);
    }
    e_full /= N;
    e_excl /= N;
    out.max_error = std::max(out.max_error, e_full);
    out.max_error_excluded = std::max(out.max_error_excluded, e_excl);
    out.mean_error += e_full;
    ++out.tuples;
  };
  if (tuples.empty()) {
    for (std::size_t n = 0; n < t.index.size(); ++n) visit(n);
  } else {
    for (std::size_t n : tuples) visit(n);
  }
  if (out.tuples) out.mean_error /= double(out.tuples);
  return out;
}

ProjectionResidual residual_of_projection(int N, double t, const Model& model, const SolverConfig& cfg,
                                          const std::vector<std::vector<int>>& tuples) {
  if (N < 2) throw InvalidArgument("projection residual needs N >= 2");
  const Grid& g = model.grid();
  if (g.dim() != 1) throw CapabilityError("projection residual supports dimension 1 only");
  if (model.beta != 0.0) throw CapabilityError("projection residual is implemented without common noise");
  const double h = g.h();
  const double dt = cfg.dt();
  const int M = g.points();
  SolverConfig c1 = cfg;
  c1.threads = 1;
  auto U_at = [&](double time, const std::vector<int>& atoms) {
    return solve_mfg(time, empirical_measure(g, atoms), model, c1);
  };

  ProjectionResidual out;
  out.per_tuple.assign(tuples.size(), 0.0);
  out.per_tuple_remainder.assign(tuples.size(), 0.0);
  parallel_for(tuples.size(), cfg.threads, [&](std::size_t q) {
    const std::vector<int>& x = tuples[q];
    if (int(x.size()) != N) throw InvalidArgument("tuple length must equal N");
    auto others_of = [&](int i) {
      std::vector<int> o;
      for (int j = 0; j < N; ++j)
        if (j != i) o.push_back(x[std::size_t(j)]);
      return o;
    };
    std::vector<MfgSolution> base;
    std::vector<double> own_grad(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      base.push_back(U_at(t, others_of(i)));
      const Field& U0 = base.back().u.front();
      const int xi = x[std::size_t(i)];
      own_grad[std::size_t(i)] = (U0[g.index(xi + 1)] - U0[g.index(xi - 1)]) / (2 * h);
    }
    double worst = 0.0, worst_split = 0.0;
    for (int i = 0; i < N; ++i) {
      const int xi = x[std::size_t(i)];
      const std::vector<int> others = others_of(i);
      const MfgSolution& sol = base[std::size_t(i)];
      const Field& U0 = sol.u.front();
      const double Ux = U0[g.index(xi)];
      const double lap_own = (U0[g.index(xi + 1)] - 2 * Ux + U0[g.index(xi - 1)]) / (h * h);
      const double Up = U_at(t + dt, others).u.front()[g.index(xi)];
      const double Um = U_at(t - dt, others).u.front()[g.index(xi)];
      const double dtU = (Up - Um) / (2 * dt);
      const DerivativeKernel K = derivative_kernel(sol, 0, model, c1);
      const std::size_t row = std::size_t(xi) * std::size_t(M);
      auto Krow = [&](int y) { return K.K[row + g.index(y)]; };
      const VectorField b = sol.drift(model, 0);

      const Vec xpos{xi * h, 0.0};
      double lhs = -dtU - lap_own + model.H.H(xpos, {own_grad[std::size_t(i)], 0.0});
      // Terms that vanish when U solves the master equation exactly: they are
      // subtracted to isolate the N-dependent remainder.
      double split = 0.0;
      for (int j = 0, slot = 0; j < N; ++j) {
        if (j == i) continue;
        const int xj = x[std::size_t(j)];
        const double Dj = (Krow(xj + 1) - Krow(xj - 1)) / (2 * h) / (N - 1);
        std::vector<int> moved = others;
        moved[std::size_t(slot)] = xj + 1;
        const double Uplus = U_at(t, moved).u.front()[g.index(xi)];
        moved[std::size_t(slot)] = xj - 1;
        const double Uminus = U_at(t, moved).u.front()[g.index(xi)];
        const double lap_j = (Uplus - 2 * Ux + Uminus) / (h * h);
        const double lap_j_first = (Krow(xj + 1) - 2 * Krow(xj) + Krow(xj - 1)) / (h * h) / (N - 1);
        const Vec xjpos{xj * h, 0.0};
        const double drift_j = model.H.DpH(xjpos, {own_grad[std::size_t(j)], 0.0})[0];
        lhs += -lap_j + drift_j * Dj;
        split += -(lap_j - lap_j_first) + (drift_j - b.comp[0][g.index(xj)]) * Dj;
        ++slot;
      }
      std::vector<std::size_t> atoms(others.begin(), others.end());
      for (auto& a : atoms) a = g.index(int(a));
      lhs -= model.F.at_empirical(g.index(xi), atoms);
      worst = std::max(worst, std::abs(lhs));
      worst_split = std::max(worst_split, std::abs(split));
    }
    out.per_tuple_remainder[q] = worst_split;
    out.per_tuple[q] = worst;
  });
  for (double r : out.per_tuple) out.max_abs = std::max(out.max_abs, r);
  for (double r : out.per_tuple_remainder) out.max_remainder = std::max(out.max_remainder, r);
  return out;
}

AveragedProjection averaged_projection_w(const NashTensor& t, int i, const Measure& m0, const Model& model,
                                         const SolverConfig& cfg, int mc_samples, std::uint64_t seed) {
  if (mc_samples < 2) throw InvalidArgument("need at least two Monte-Carlo samples");
  const Grid& g = t.grid;
  const int N = t.N;
  const int M = g.points();
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> draw(m0.density().raw().begin(), m0.density().raw().end());
  const Field U = solve_mfg(t.tg.t0, m0, model, cfg).u.front();
  AveragedProjection out;
  out.w = Field(g);
  std::vector<int> k(static_cast<std::size_t>(N));
  for (int x = 0; x < M; ++x) {
    double sum = 0.0, sq = 0.0;
    for (int r = 0; r < mc_samples; ++r) {
      for (int j = 0; j < N; ++j) k[std::size_t(j)] = j == i ? x : draw(rng);
      const double val = t.v0[std::size_t(i)][t.index.flat(k)];
      sum += val;
      sq += val * val;
    }
    const double mean = sum / mc_samples;
    const double var = std::max(0.0, (sq - mc_samples * mean * mean) / (mc_samples - 1));
    out.w[std::size_t(x)] = mean;
    out.l1_distance += std::abs(mean - U[std::size_t(x)]) * m0[std::size_t(x)] * g.h();
    out.error_bar += std::sqrt(var / mc_samples) * m0[std::size_t(x)] * g.h();
  }
  return out;
}

}  // namespace mfg

namespace mfg {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated tensor snapshot header");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

}  // namespace

void write_nash_snapshot(const std::string& path, const NashTensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  put_u32(out, 1);
  put_u32(out, std::uint32_t(t.grid.points()));
  put_u32(out, std::uint32_t(t.N));
  put_u32(out, std::uint32_t(t.v0.size()));
  for (const auto& v : t.v0) out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::vector<double>> read_nash_snapshot(const std::string& path, int& N, int& M) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  if (get_u32(in) != 1) throw IoError("tensor snapshot must have dim 1");
  M = int(get_u32(in));
  N = int(get_u32(in));
  const std::uint32_t players = get_u32(in);
  const TupleIndex idx(N, M);
  std::vector<std::vector<double>> out(players, std::vector<double>(idx.size()));
  for (auto& v : out)
    if (!in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(double))))
      throw IoError("truncated tensor snapshot payload");
  return out;
}

}  // namespace mfg
