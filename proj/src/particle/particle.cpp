#include "particle/particle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "mfg/kernel.hpp"
#include "torus/operators.hpp"
#include "torus/wasserstein.hpp"

namespace mfg {

namespace {

double wrap01(double x) { return x - std::floor(x); }

// Bilinear periodic interpolation of a row-major M x M table.
double interp_table(const std::vector<double>& A, int M, double x, double y) {
  const double px = wrap01(x) * M, py = wrap01(y) * M;
  const int i0 = int(px) % M, j0 = int(py) % M;
  const double fx = px - std::floor(px), fy = py - std::floor(py);
  const int i1 = (i0 + 1) % M, j1 = (j0 + 1) % M;
  auto a = [&](int i, int j) { return A[std::size_t(i) * std::size_t(M) + std::size_t(j)]; };
  return (1 - fx) * ((1 - fy) * a(i0, j0) + fy * a(i0, j1)) + fx * ((1 - fy) * a(i1, j0) + fy * a(i1, j1));
}

Field gradient_1d(const Field& u) { return gradient(u).comp[0]; }

}  // namespace

TensorFeedback::TensorFeedback(const NashTensor& t) : t_(t) {
  if (t.own_gradient.empty()) throw InvalidArgument("Nash tensor was solved without feedback history");
}

double TensorFeedback::own_gradient(int s, int i, std::span<const double> y) const { return t_.feedback(s, i, y); }

std::shared_ptr<const KernelPath> build_kernel_path(const MfgSolution& sol, const Model& model,
                                                    const SolverConfig& cfg) {
  const Grid& g = model.grid();
  if (g.dim() != 1) throw CapabilityError("particle systems support dimension 1 only");
  auto path = std::make_shared<KernelPath>();
  path->grid = g;
  const int S = sol.steps();
  const int M = g.points();
  const double inv2h = 0.5 / g.h();
  path->du.resize(std::size_t(S));
  path->dxK.resize(std::size_t(S));
  for (int s = 0; s < S; ++s) {
    path->du[std::size_t(s)] = gradient_1d(sol.u[std::size_t(s)]);
    const DerivativeKernel K = derivative_kernel(sol, s, model, cfg);
    std::vector<double>& D = path->dxK[std::size_t(s)];
    D.assign(std::size_t(M) * std::size_t(M), 0.0);
    for (int x = 0; x < M; ++x)
      for (int y = 0; y < M; ++y)
        D[std::size_t(x) * std::size_t(M) + std::size_t(y)] = (K.at(g.index(x + 1), std::size_t(y)) -
                                                               K.at(g.index(x - 1), std::size_t(y))) * inv2h;
  }
  return path;
}

ProjectedMasterFeedback::ProjectedMasterFeedback(int N, std::shared_ptr<const KernelPath> path)
    : N_(N), path_(std::move(path)) {
  if (N < 2) throw InvalidArgument("projected feedback needs N >= 2");
}

double ProjectedMasterFeedback::own_gradient(int s, int i, std::span<const double> y) const {
  const Grid& g = path_->grid;
  const double yi = y[std::size_t(i)];
  double corr = 0.0;
  for (int j = 0; j < N_; ++j)
    if (j != i) corr += interp_table(path_->dxK[std::size_t(s)], g.points(), yi, y[std::size_t(j)]);
  return interp(path_->du[std::size_t(s)], {yi, 0.0}) + corr / (N_ - 1);
}

MeanFieldFeedback::MeanFieldFeedback(int N, const MfgSolution& sol) : N_(N) {
  for (int s = 0; s < sol.steps(); ++s) du_.push_back(gradient_1d(sol.u[std::size_t(s)]));
}

double MeanFieldFeedback::own_gradient(int s, int i, std::span<const double> y) const {
  return interp(du_[std::size_t(s)], {y[std::size_t(i)], 0.0});
}

double sde_step(const Model& model, const MfgSolution& mfg, int refine) {
  const double dt = mfg.tg.dt();
  const double L = model.H.lipschitz();
  const double h = model.grid().h();
  const int sub = std::max(1, int(std::ceil(2.0 * L * dt / h - 1e-12)));
  const double step = dt / sub / std::pow(2.0, refine);
  if (step * L > h * (1 + 1e-12)) throw CflViolation("SDE step violates dt_sde * L_H <= h");
  return step;
}

double empirical_law_gap(const std::vector<std::vector<double>>& X, const MfgSolution& mfg) {
  const Grid& g = mfg.m.front().grid();
  double worst = 0.0;
  for (std::size_t s = 0; s < X.size() && s < mfg.m.size(); ++s) {
    std::vector<Vec> pts;
    pts.reserve(X[s].size());
    for (double x : X[s]) pts.push_back({wrap01(x), 0.0});
    const Measure emp = deposit(g, pts);
    worst = std::max(worst, wasserstein1(emp, mfg.m[s]));
  }
  return worst;
}

ChaosRow simulate_pair(const PlayerFeedback& fb, const MfgSolution& mfg, const Model& model,
                       const ParticleConfig& pc) {
  if (model.beta != 0.0) throw CapabilityError("particle pairs are simulated without common noise");
  if (pc.n_mc < 2) throw InvalidArgument("need at least two Monte-Carlo ensembles");
  const int N = fb.players();
  const int S = mfg.steps();
  if (fb.levels() < S) throw InvalidArgument("feedback has fewer levels than the MFG solution");
  const Grid& g = model.grid();
  const double dt = mfg.tg.dt();
  const double dts = sde_step(model, mfg, std::max(0, pc.dt_refine - 1));
  const int sub = int(std::lround(dt / dts));
  const double noise = std::sqrt(2.0 * dts);
  std::vector<Field> du;
  for (int s = 0; s < S; ++s) du.push_back(gradient(mfg.u[std::size_t(s)]).comp[0]);
  const Measure& m0 = mfg.m.front();

  std::vector<double> gap(static_cast<std::size_t>(pc.n_mc)), law(gap.size());
  parallel_for(std::size_t(pc.n_mc), pc.threads, [&](std::size_t e) {
    std::seed_seq seq{std::uint64_t(pc.seed), std::uint64_t(N), std::uint64_t(e)};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<int> draw(m0.density().raw().begin(), m0.density().raw().end());
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t nN = static_cast<std::size_t>(N);
    std::vector<double> Y(nN), X(nN), sup(nN, 0.0), bY(nN);
    for (int i = 0; i < N; ++i) Y[std::size_t(i)] = X[std::size_t(i)] = draw(rng) * g.h();
    std::vector<std::vector<double>> levels{X};
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k < sub; ++k) {
        for (int i = 0; i < N; ++i)
          bY[std::size_t(i)] = -model.H.DpH({wrap01(Y[std::size_t(i)]), 0.0}, {fb.own_gradient(s, i, Y), 0.0})[0];
        for (int i = 0; i < N; ++i) {
          const double xi = X[std::size_t(i)];
          const double p = interp(du[std::size_t(s)], {xi, 0.0});
          const double bX = -model.H.DpH({wrap01(xi), 0.0}, {p, 0.0})[0];
          const double dW = noise * gauss(rng);
          Y[std::size_t(i)] += bY[std::size_t(i)] * dts + dW;
          X[std::size_t(i)] += bX * dts + dW;
          sup[std::size_t(i)] = std::max(sup[std::size_t(i)], std::abs(Y[std::size_t(i)] - X[std::size_t(i)]));
        }
      }
      levels.push_back(X);
    }
    CompensatedSum acc;
    for (double v : sup) acc.add(v);
    gap[e] = acc.value() / N;
    law[e] = empirical_law_gap(levels, mfg);
  });

  auto mean_stderr = [](const std::vector<double>& v, double& mean, double& se) {
    CompensatedSum a;
    for (double x : v) a.add(x);
    mean = a.value() / double(v.size());
    CompensatedSum q;
    for (double x : v) q.add((x - mean) * (x - mean));
    se = std::sqrt(q.value() / double(v.size() - 1) / double(v.size()));
  };
  ChaosRow row;
  row.N = N;
  row.n_mc = pc.n_mc;
  row.dt_sde = dts;
  mean_stderr(gap, row.gap, row.gap_stderr);
  mean_stderr(law, row.law_gap, row.law_gap_stderr);
  return row;
}

ChaosReport chaos_sweep(std::span<const int> Ns, const MfgSolution& mfg, const Model& model, const SolverConfig& cfg,
                        const ParticleConfig& pc) {
  const auto path = build_kernel_path(mfg, model, cfg);
  ChaosReport rep;
  std::vector<double> n, gaps, laws;
  for (int N : Ns) {
    ProjectedMasterFeedback fb(N, path);
    rep.rows.push_back(simulate_pair(fb, mfg, model, pc));
    n.push_back(N);
    gaps.push_back(rep.rows.back().gap);
    laws.push_back(rep.rows.back().law_gap);
  }
  rep.gap_slope = fit_slope(n, gaps);
  rep.law_slope = fit_slope(n, laws);
  return rep;
}

}  // namespace mfg
