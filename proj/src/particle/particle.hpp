#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "common/rates.hpp"
#include "mfg/solver.hpp"
#include "nash/nash.hpp"

namespace mfg {

/// Feedback of the N-player system: D_{x_i} v^{N,i}(t_s, y) at the full tuple y.
class PlayerFeedback {
 public:
  virtual ~PlayerFeedback() = default;
  virtual int players() const = 0;
  virtual int levels() const = 0;
  virtual double own_gradient(int s, int i, std::span<const double> y) const = 0;
};

/// Interpolated from a Nash tensor solved with feedback history.
class TensorFeedback final : public PlayerFeedback {
 public:
  explicit TensorFeedback(const NashTensor& t);
  int players() const override { return t_.N; }
  int levels() const override { return t_.tg.steps + 1; }
  double own_gradient(int s, int i, std::span<const double> y) const override;

 private:
  const NashTensor& t_;
};

/// Du(t_s, .) and D_x K_s(x, y) along an MFG solution, K_s being the
/// derivative kernel at (t_s, m_s), for levels s = 0 .. S-1. Dimension 1.
struct KernelPath {
  Grid grid;
  std::vector<Field> du;
  std::vector<std::vector<double>> dxK;  // row-major [x][y]
};
std::shared_ptr<const KernelPath> build_kernel_path(const MfgSolution& sol, const Model& model,
                                                    const SolverConfig& cfg);

/// D_x U(t_s, y_i, m^{N,i}_y) expanded to first order around the MFG flow:
/// Du(t_s, y_i) + (1/(N-1)) sum_{j != i} D_x K_s(y_i, y_j). Usable for any N.
class ProjectedMasterFeedback final : public PlayerFeedback {
 public:
  ProjectedMasterFeedback(int N, std::shared_ptr<const KernelPath> path);
  int players() const override { return N_; }
  int levels() const override { return int(path_->du.size()); }
  double own_gradient(int s, int i, std::span<const double> y) const override;

 private:
  int N_;
  std::shared_ptr<const KernelPath> path_;
};

/// Mean-field feedback Du(t_s, y_i) for every player (the limit system).
class MeanFieldFeedback final : public PlayerFeedback {
 public:
  MeanFieldFeedback(int N, const MfgSolution& sol);
  int players() const override { return N_; }
  int levels() const override { return int(du_.size()); }
  double own_gradient(int s, int i, std::span<const double> y) const override;

 private:
  int N_;
  std::vector<Field> du_;
};

struct ParticleConfig {
  int n_mc = 200;
  std::uint64_t seed = 0;
  int dt_refine = 1;  // extra halvings of the SDE step
  int threads = 1;
};

struct ChaosRow {
  int N = 0;
  double gap = 0.0;  // E[sup_t |Y_i - X_i|]
  double gap_stderr = 0.0;
  double law_gap = 0.0;  // E[sup_t d1(empirical(X_t), m_t)]
  double law_gap_stderr = 0.0;
  double dt_sde = 0.0;
  int n_mc = 0;
};

struct ChaosReport {
  std::vector<ChaosRow> rows;
  SlopeFit gap_slope;
  SlopeFit law_slope;
};

/// SDE step: dt / ceil(2 L_H dt / h) so that dt_sde <= h / (2 L_H), halved
/// `refine` more times.
double sde_step(const Model& model, const MfgSolution& mfg, int refine = 0);

/// Euler-Maruyama for the Nash trajectories Y and the McKean-Vlasov
/// trajectories X with identical initial draws (nodes sampled from m_0) and
/// identical Brownian increments. Feedbacks are frozen on each PDE level.
ChaosRow simulate_pair(const PlayerFeedback& fb, const MfgSolution& mfg, const Model& model,
                       const ParticleConfig& pc);

/// sup over PDE levels of d1(empirical(X at t_s), m_s); X holds one position
/// vector per level.
double empirical_law_gap(const std::vector<std::vector<double>>& X, const MfgSolution& mfg);

ChaosReport chaos_sweep(std::span<const int> Ns, const MfgSolution& mfg, const Model& model, const SolverConfig& cfg,
                        const ParticleConfig& pc);

}  // namespace mfg
