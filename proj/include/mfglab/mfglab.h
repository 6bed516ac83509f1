/* mfglab: mean field game solvers on the periodic torus. C interface. */
#ifndef MFGLAB_H
#define MFGLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define MFGLAB_API __attribute__((visibility("default")))
#else
#define MFGLAB_API
#endif

/* Status codes double as CLI exit codes. */
typedef enum mfglab_status {
  MFGLAB_OK = 0,
  MFGLAB_ERR_INTERNAL = 1,
  MFGLAB_ERR_CONFIG = 2,
  MFGLAB_ERR_NONCONVERGENCE = 3,
  MFGLAB_ERR_BUDGET = 4,
  MFGLAB_ERR_NUMERICAL = 5,
  MFGLAB_ERR_INVALID_ARGUMENT = 6,
  MFGLAB_ERR_IO = 7
} mfglab_status;

typedef struct mfglab_context mfglab_context;
typedef struct mfglab_solution mfglab_solution;
typedef struct mfglab_kernel mfglab_kernel;
typedef struct mfglab_nash mfglab_nash;

/* Message of the last failed call on this thread ("" if none). */
MFGLAB_API const char* mfglab_last_error(void);
MFGLAB_API const char* mfglab_version(void);
MFGLAB_API size_t mfglab_subcommand_count(void);
MFGLAB_API const char* mfglab_subcommand_name(size_t i);

/* A context owns one parsed experiment configuration. MFGLAB_* environment
   overrides are applied when use_env is nonzero. */
MFGLAB_API mfglab_status mfglab_context_from_file(const char* path, int use_env, mfglab_context** out);
MFGLAB_API mfglab_status mfglab_context_from_string(const char* yaml, int use_env, mfglab_context** out);
MFGLAB_API void mfglab_context_destroy(mfglab_context* ctx);

MFGLAB_API mfglab_status mfglab_context_set_seed(mfglab_context* ctx, uint64_t seed);
MFGLAB_API mfglab_status mfglab_context_set_threads(mfglab_context* ctx, int threads);
MFGLAB_API mfglab_status mfglab_context_set_output_dir(mfglab_context* ctx, const char* dir);
/* Copies the 16-hex-digit configuration hash (plus NUL) into buf. */
MFGLAB_API mfglab_status mfglab_context_config_hash(const mfglab_context* ctx, char* buf, size_t len);
/* Canonical configuration as JSON; valid until the context changes. */
MFGLAB_API const char* mfglab_context_config_json(mfglab_context* ctx);

/* Runs a subcommand, writing artifacts to the output directory. The summary
   JSON of the last successful run stays readable through
   mfglab_context_last_summary. */
MFGLAB_API mfglab_status mfglab_run(mfglab_context* ctx, const char* subcommand);
MFGLAB_API const char* mfglab_context_last_summary(const mfglab_context* ctx);

/* MFG system from the configured (t0, m0). */
MFGLAB_API mfglab_status mfglab_solve_mfg(const mfglab_context* ctx, mfglab_solution** out);
MFGLAB_API void mfglab_solution_destroy(mfglab_solution* sol);
MFGLAB_API size_t mfglab_solution_nodes(const mfglab_solution* sol);
MFGLAB_API int mfglab_solution_steps(const mfglab_solution* sol);
MFGLAB_API int mfglab_solution_iterations(const mfglab_solution* sol);
/* Copies u or m at time index s (0..steps) into buf of at least nodes doubles. */
MFGLAB_API mfglab_status mfglab_solution_u(const mfglab_solution* sol, int s, double* buf, size_t len);
MFGLAB_API mfglab_status mfglab_solution_m(const mfglab_solution* sol, int s, double* buf, size_t len);

/* Derivative kernel K(x, y) at the configured (t0, m0), row-major. */
MFGLAB_API mfglab_status mfglab_kernel_compute(const mfglab_context* ctx, mfglab_kernel** out);
MFGLAB_API void mfglab_kernel_destroy(mfglab_kernel* k);
MFGLAB_API size_t mfglab_kernel_nodes(const mfglab_kernel* k);
MFGLAB_API mfglab_status mfglab_kernel_values(const mfglab_kernel* k, double* buf, size_t len);

/* N-player Nash system on the configured grid (dimension 1). */
MFGLAB_API mfglab_status mfglab_nash_solve(const mfglab_context* ctx, int players, mfglab_nash** out);
MFGLAB_API void mfglab_nash_destroy(mfglab_nash* n);
MFGLAB_API int mfglab_nash_players(const mfglab_nash* n);
/* Value of `player` (0-based) at t0 with player j on node nodes[j]. */
MFGLAB_API mfglab_status mfglab_nash_value(const mfglab_nash* n, int player, const int* nodes, double* out);

#ifdef __cplusplus
}
#endif

#endif
