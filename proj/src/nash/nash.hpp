#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfg/solver.hpp"

namespace mfg {

/// Node tuples of N players on a 1-d grid with M nodes, flattened row-major
/// with the last player fastest.
class TupleIndex {
 public:
  TupleIndex() = default;
  TupleIndex(int N, int M);
  int players() const { return N_; }
  int points() const { return M_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int j) const { return strides_[std::size_t(j)]; }
  std::size_t flat(std::span<const int> k) const;
  void unflat(std::size_t n, std::span<int> k) const;
  int coord(std::size_t n, int j) const { return int((n / strides_[std::size_t(j)]) % std::size_t(M_)); }
  /// Flat index of the neighbour one node forward (+1) or backward (-1) along axis j.
  std::size_t neighbour(std::size_t n, int j, int dir) const;

 private:
  int N_ = 0;
  int M_ = 0;
  std::size_t size_ = 0;
  std::vector<std::size_t> strides_;
};

/// Largest tensor allowed per field.
inline constexpr std::size_t kNashBudget = std::size_t(1) << 24;

/// The N value functions of the Nash system on the tensor grid.
struct NashTensor {
  int N = 0;
  Grid grid;
  TimeGrid tg;
  double beta = 0.0;
  TupleIndex index;
  std::vector<std::vector<double>> v0;  // v^i at t0, per player
  std::vector<std::vector<double>> vT;  // v^i at T
  /// D_{x_1} v^1 at every level (only when requested); other players follow by exchangeability.
  std::vector<std::vector<double>> own_gradient;

  double value(int i, std::span<const int> k) const { return v0[std::size_t(i)][index.flat(k)]; }
  /// D_{x_i} v^i(t_s, y) by multilinear interpolation at arbitrary positions y.
  double feedback(int s, int i, std::span<const double> y) const;
};

/// Backward stepping of the Nash system. Diffusion (including the common-noise
/// cross term beta * sum_{j,k} d_j d_k) is applied by the exact spectral
/// propagator; Hamiltonian and cross-drift terms are explicit from the previous
/// level. Throws BudgetExceeded when M^N > 2^24.
NashTensor solve_nash(int N, const Model& model, const SolverConfig& cfg, bool keep_feedback = false);

/// max over random permutations and tuples of |v^{pi(i)}(x o pi^-1) - v^i(x)|.
double exchangeability_defect(const NashTensor& t, int n_perms, std::uint64_t seed);

/// Empirical measure of the grid nodes `atoms` (unit mass each, equal weights).
Measure empirical_measure(const Grid& g, std::span<const int> atoms);

/// Caches U(t0, ., m) for empirical measures keyed by the sorted atom multiset.
class MasterCache {
 public:
  MasterCache(const Model& model, const SolverConfig& cfg, double t0) : model_(model), cfg_(cfg), t0_(t0) {}
  const Field& U(std::vector<int> atoms);
  std::size_t solves() const { return cache_.size(); }

 private:
  const Model& model_;
  SolverConfig cfg_;
  double t0_;
  std::vector<std::pair<std::vector<int>, Field>> cache_;  // sorted by key
};

struct NashMasterError {
  double max_error = 0.0;   // sup over tuples of (1/N) sum_i |v^i - U(x_i, m^N_x)|
  double mean_error = 0.0;  // mean over tuples
  double max_error_excluded = 0.0;  // same with m^{N,i}_x in place of m^N_x
  std::size_t tuples = 0;
};

/// Gap between the Nash values at t0 and the master function evaluated at the
/// full empirical measure. `tuples` lists flat tuple indices (empty = all).
NashMasterError nash_vs_master_error(const NashTensor& t, const Model& model, const SolverConfig& cfg,
                                     std::span<const std::size_t> tuples = {});

struct ProjectionResidual {
  std::vector<double> per_tuple;  // max_i |r^{N,i}| per sample tuple
  double max_abs = 0.0;
  /// r^{N,i} minus the discrete master-equation residual at (t, x_i, m^{N,i}_x):
  /// the second-order measure term plus the m^{N,i} / m^{N,j} drift mismatch.
  std::vector<double> per_tuple_remainder;
  double max_remainder = 0.0;
};

/// Residual of u^{N,i}(t,x) = U(t, x_i, m^{N,i}_x) in the Nash system at time t.
/// D_{x_j} u^i comes from the derivative kernel at m^{N,i}_x; the second
/// derivative in x_j moves atom j by one node each way.
ProjectionResidual residual_of_projection(int N, double t, const Model& model, const SolverConfig& cfg,
                                          const std::vector<std::vector<int>>& tuples);

struct AveragedProjection {
  Field w;                 // Monte-Carlo average over the other players
  double l1_distance = 0;  // sum_x |w - U(t0, x, m0)| m0(x) h
  double error_bar = 0;    // sum_x stderr(x) m0(x) h
};

/// w^{N,i}(t0, x, m0): average of v^i(t0, .) with players j != i drawn
/// independently from m0 (node sampling), per node x.
AveragedProjection averaged_projection_w(const NashTensor& t, int i, const Measure& m0, const Model& model,
                                         const SolverConfig& cfg, int mc_samples, std::uint64_t seed);

}  // namespace mfg

namespace mfg {

/// Tensor snapshot: u32 dim (= 1), u32 M, u32 N, u32 players stored, then
/// per player M^N little-endian doubles (t0 slice, last player fastest).
void write_nash_snapshot(const std::string& path, const NashTensor& t);
/// Returns the stored player slices; N and M through the out parameters.
std::vector<std::vector<double>> read_nash_snapshot(const std::string& path, int& N, int& M);

}  // namespace mfg
