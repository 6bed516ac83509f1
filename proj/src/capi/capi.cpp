#include "mfglab/mfglab.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "common/error.hpp"
#include "harness/config.hpp"
#include "harness/experiments.hpp"
#include "mfg/kernel.hpp"
#include "nash/nash.hpp"

struct mfglab_context {
  mfg::harness::ExperimentConfig cfg;
  std::string config_json;
  std::string summary = "{}";
};

struct mfglab_solution {
  mfg::MfgSolution sol;
};

struct mfglab_kernel {
  mfg::DerivativeKernel k;
};

struct mfglab_nash {
  mfg::NashTensor t;
};

namespace {

thread_local std::string g_last_error;

mfglab_status fail(mfglab_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn, translating every exception into a status code.
template <class Fn>
mfglab_status guarded(Fn&& fn) noexcept {
  try {
    g_last_error.clear();
    fn();
    return MFGLAB_OK;
  } catch (const mfg::Error& e) {
    return fail(static_cast<mfglab_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFGLAB_ERR_BUDGET, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFGLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFGLAB_ERR_INTERNAL, "unknown error");
  }
}

std::map<std::string, std::string> env_if(int use_env) {
  return use_env ? mfg::harness::process_environment() : std::map<std::string, std::string>{};
}

void need(const void* p, const char* what) {
  if (!p) throw mfg::InvalidArgument(std::string(what) + " is null");
}

struct Setup {
  mfg::SolverConfig solver;
  mfg::Model model;
  mfg::Measure m0;
  explicit Setup(const mfg::harness::ExperimentConfig& c)
      : solver(mfg::harness::solver_config(c)),
        model(mfg::build_model(c.model, solver.grid)),
        m0(mfg::harness::build_measure(c.experiment.m0, solver.grid)) {}
};

mfglab_status copy_field(const mfg::Field& f, double* buf, size_t len) {
  return guarded([&] {
    need(buf, "buffer");
    if (len < f.size()) throw mfg::InvalidArgument("buffer too small");
    std::memcpy(buf, f.raw().data(), f.size() * sizeof(double));
  });
}

}  // namespace

extern "C" {

const char* mfglab_last_error(void) { return g_last_error.c_str(); }
const char* mfglab_version(void) { return "1.0.0"; }
size_t mfglab_subcommand_count(void) { return mfg::harness::kSubcommands.size(); }
const char* mfglab_subcommand_name(size_t i) {
  return i < mfg::harness::kSubcommands.size() ? mfg::harness::kSubcommands[i].c_str() : nullptr;
}

mfglab_status mfglab_context_from_file(const char* path, int use_env, mfglab_context** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto ctx = std::make_unique<mfglab_context>();
    ctx->cfg = mfg::harness::load_config(path, env_if(use_env));
    *out = ctx.release();
  });
}

mfglab_status mfglab_context_from_string(const char* yaml, int use_env, mfglab_context** out) {
  return guarded([&] {
    need(yaml, "yaml");
    need(out, "out");
    auto ctx = std::make_unique<mfglab_context>();
    ctx->cfg = mfg::harness::parse_config(yaml, env_if(use_env));
    *out = ctx.release();
  });
}

void mfglab_context_destroy(mfglab_context* ctx) { delete ctx; }

mfglab_status mfglab_context_set_seed(mfglab_context* ctx, uint64_t seed) {
  return guarded([&] {
    need(ctx, "context");
    ctx->cfg.experiment.seed = seed;
  });
}

mfglab_status mfglab_context_set_threads(mfglab_context* ctx, int threads) {
  return guarded([&] {
    need(ctx, "context");
    if (threads < 1) throw mfg::InvalidArgument("threads must be at least 1");
    ctx->cfg.threads = threads;
  });
}

mfglab_status mfglab_context_set_output_dir(mfglab_context* ctx, const char* dir) {
  return guarded([&] {
    need(ctx, "context");
    need(dir, "dir");
    ctx->cfg.output.dir = dir;
  });
}

mfglab_status mfglab_context_config_hash(const mfglab_context* ctx, char* buf, size_t len) {
  return guarded([&] {
    need(ctx, "context");
    need(buf, "buffer");
    const std::string h = mfg::harness::config_hash(ctx->cfg);
    if (len < h.size() + 1) throw mfg::InvalidArgument("buffer too small");
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

const char* mfglab_context_config_json(mfglab_context* ctx) {
  if (!ctx) return nullptr;
  ctx->config_json = mfg::harness::to_json(ctx->cfg).dump();
  return ctx->config_json.c_str();
}

mfglab_status mfglab_run(mfglab_context* ctx, const char* subcommand) {
  return guarded([&] {
    need(ctx, "context");
    need(subcommand, "subcommand");
    const auto r = mfg::harness::run(subcommand, ctx->cfg, ctx->cfg.output.dir);
    ctx->summary = r.summary.dump();
  });
}

const char* mfglab_context_last_summary(const mfglab_context* ctx) { return ctx ? ctx->summary.c_str() : nullptr; }

mfglab_status mfglab_solve_mfg(const mfglab_context* ctx, mfglab_solution** out) {
  return guarded([&] {
    need(ctx, "context");
    need(out, "out");
    const Setup s(ctx->cfg);
    auto r = std::make_unique<mfglab_solution>();
    r->sol = mfg::solve_mfg(ctx->cfg.experiment.t0, s.m0, s.model, s.solver);
    *out = r.release();
  });
}

void mfglab_solution_destroy(mfglab_solution* sol) { delete sol; }
size_t mfglab_solution_nodes(const mfglab_solution* sol) { return sol ? sol->sol.u.front().size() : 0; }
int mfglab_solution_steps(const mfglab_solution* sol) { return sol ? sol->sol.steps() : 0; }
int mfglab_solution_iterations(const mfglab_solution* sol) { return sol ? sol->sol.iterations : 0; }

mfglab_status mfglab_solution_u(const mfglab_solution* sol, int s, double* buf, size_t len) {
  if (!sol) return fail(MFGLAB_ERR_INVALID_ARGUMENT, "solution is null");
  if (s < 0 || s > sol->sol.steps()) return fail(MFGLAB_ERR_INVALID_ARGUMENT, "time index out of range");
  return copy_field(sol->sol.u[std::size_t(s)], buf, len);
}

mfglab_status mfglab_solution_m(const mfglab_solution* sol, int s, double* buf, size_t len) {
  if (!sol) return fail(MFGLAB_ERR_INVALID_ARGUMENT, "solution is null");
  if (s < 0 || s > sol->sol.steps()) return fail(MFGLAB_ERR_INVALID_ARGUMENT, "time index out of range");
  return copy_field(sol->sol.m[std::size_t(s)].density(), buf, len);
}

mfglab_status mfglab_kernel_compute(const mfglab_context* ctx, mfglab_kernel** out) {
  return guarded([&] {
    need(ctx, "context");
    need(out, "out");
    const Setup s(ctx->cfg);
    auto r = std::make_unique<mfglab_kernel>();
    r->k = mfg::derivative_kernel(ctx->cfg.experiment.t0, s.m0, s.model, s.solver);
    *out = r.release();
  });
}

void mfglab_kernel_destroy(mfglab_kernel* k) { delete k; }
size_t mfglab_kernel_nodes(const mfglab_kernel* k) { return k ? k->k.n() : 0; }

mfglab_status mfglab_kernel_values(const mfglab_kernel* k, double* buf, size_t len) {
  return guarded([&] {
    need(k, "kernel");
    need(buf, "buffer");
    if (len < k->k.K.size()) throw mfg::InvalidArgument("buffer too small");
    std::memcpy(buf, k->k.K.data(), k->k.K.size() * sizeof(double));
  });
}

mfglab_status mfglab_nash_solve(const mfglab_context* ctx, int players, mfglab_nash** out) {
  return guarded([&] {
    need(ctx, "context");
    need(out, "out");
    const Setup s(ctx->cfg);
    auto r = std::make_unique<mfglab_nash>();
    r->t = mfg::solve_nash(players, s.model, s.solver);
    *out = r.release();
  });
}

void mfglab_nash_destroy(mfglab_nash* n) { delete n; }
int mfglab_nash_players(const mfglab_nash* n) { return n ? n->t.N : 0; }

mfglab_status mfglab_nash_value(const mfglab_nash* n, int player, const int* nodes, double* out) {
  return guarded([&] {
    need(n, "nash");
    need(nodes, "nodes");
    need(out, "out");
    if (player < 0 || player >= n->t.N) throw mfg::InvalidArgument("player out of range");
    const int M = n->t.grid.points();
    for (int j = 0; j < n->t.N; ++j)
      if (nodes[j] < 0 || nodes[j] >= M) throw mfg::InvalidArgument("node index out of range");
    *out = n->t.value(player, std::span<const int>(nodes, std::size_t(n->t.N)));
  });
}

}  // extern "C"
