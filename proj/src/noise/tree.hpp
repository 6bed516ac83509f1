#pragma once

#include <vector>

#include "mfg/solver.hpp"

namespace mfg {

/// One node of the binomial common-noise tree. Interval nodes cover
/// [t_start, t_end] with the fine PDE substeps of one noise level; the
/// accumulated shift sqrt(2 beta) W is constant on the interval.
struct TreeNode {
  int level = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double shift = 0.0;
  std::vector<Field> u;    // u~ on the interval, substeps + 1 slices
  std::vector<Measure> m;  // m~ on the interval
  /// u~(t_start) minus the parent's u~(t_start-), zero at the root. Sibling
  /// jumps sum to zero.
  Field jump;
};

/// Nodes are stored in heap order: children of n are 2n+1 (shift - delta) and
/// 2n+2 (shift + delta). Leaves hold only the terminal value at T.
struct TreeSolution {
  double t0 = 0.0;
  double T = 1.0;
  double beta = 0.0;
  int K = 1;
  int substeps = 1;
  double delta = 0.0;  // sqrt(2 beta dt_W)
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_shift;
  std::vector<Field> leaf_u;
  int iterations = 0;
  std::vector<double> gap_history;

  const Field& root_u() const { return nodes.front().u.front(); }
  std::size_t interval_nodes() const { return nodes.size(); }
};

/// Damped Picard on the whole tree for the shifted system: forward m~ along
/// every path with drift DpH(x + shift, Du~), backward u~ with source
/// F~ - H~ inside each interval and the average of the two children at each
/// branch point. The fine steps come from cfg (t0 on its grid); their number
/// must be a multiple of K. `base_shift` offsets every node shift.
TreeSolution solve_tree(double t0, const Measure& m0, const Model& model, const SolverConfig& cfg, int K,
                        double base_shift = 0.0);

struct NodeGap {
  int node = 0;
  int level = 0;
  double time = 0.0;
  double gap = 0.0;
};

/// For every interval node below the root: push m~ forward by the node shift,
/// re-solve the tree from (t_start, m) with noise restarted at zero, and
/// compare u~ at the node with the re-solved root value evaluated at x + shift.
std::vector<NodeGap> master_consistency(const TreeSolution& tree, const Model& model, const SolverConfig& cfg);

struct OriginalFields {
  Field u;      // u(x) = u~(x - shift)
  Measure m;    // (id + shift) # m~
  Field v;      // int D_m U(t, x, m, y) dm(y), first-order kernel
};

/// Undoes the change of variables at the start of each interval node. The
/// field v uses the derivative kernel of the noise-free system at (t, m).
std::vector<OriginalFields> reconstruct_original_fields(const TreeSolution& tree, const Model& model,
                                                        const SolverConfig& cfg, bool with_v = true);

}  // namespace mfg

#include <filesystem>
#include <string>

namespace mfg {

/// Persists a tree as `<stem>_u.bin` and `<stem>_m.bin` (every interval slice
/// in node order, then the leaf values in `_u.bin`) plus `<stem>.json` with
/// the topology: per node its level, interval, shift and slice offset.
void write_tree(const std::filesystem::path& dir, const std::string& stem, const TreeSolution& tree,
                const std::string& config_hash);
/// Inverse of write_tree; jumps are recomputed from the stored slices.
TreeSolution read_tree(const std::filesystem::path& dir, const std::string& stem);

}  // namespace mfg
