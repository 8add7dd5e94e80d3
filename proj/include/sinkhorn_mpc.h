#ifndef SINKHORN_MPC_H
#define SINKHORN_MPC_H

/* C interface to the Sinkhorn MPC library. All functions return an
 * smpc_status; on failure smpc_last_error() describes the problem for the
 * calling thread. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(SMPC_BUILDING_LIBRARY)
#define SMPC_API __attribute__((visibility("default")))
#else
#define SMPC_API
#endif

typedef enum smpc_status {
  SMPC_OK = 0,
  SMPC_ERR_INVALID_ARGUMENT = 1, /* null pointer, bad enum, empty list */
  SMPC_ERR_SCHEMA = 2,           /* scenario file failed validation */
  SMPC_ERR_IO = 3,
  SMPC_ERR_DIMENSION = 4,
  SMPC_ERR_PARAMETER = 5,
  SMPC_ERR_MODEL = 6,            /* uncontrollable horizon or singular B */
  SMPC_ERR_NUMERICAL = 7,        /* breakdown during a run */
  SMPC_ERR_NONCONVERGENCE = 8,
  SMPC_ERR_INTERNAL = 9
} smpc_status;

typedef enum smpc_mode {
  SMPC_MODE_SINKHORN = 0,
  SMPC_MODE_HUNGARIAN_BASELINE = 1,
  SMPC_MODE_FIXED_BASELINE = 2
} smpc_mode;

typedef enum smpc_snapshots {
  SMPC_SNAPSHOTS_AUTO = 0,
  SMPC_SNAPSHOTS_ON = 1,
  SMPC_SNAPSHOTS_OFF = 2
} smpc_snapshots;

typedef struct smpc_scenario smpc_scenario;

typedef struct smpc_run_summary {
  size_t agents;
  long steps;
  double total_raw_energy;
  double total_deviation_energy;
  double final_residual;
  long first_step_iterations;
  long total_sinkhorn_iterations;
  double sinkhorn_seconds_per_iteration;
  double hungarian_seconds_per_solve;
  long assignment_changes;
  size_t warning_count;
} smpc_run_summary;

SMPC_API const char* smpc_version(void);
SMPC_API const char* smpc_status_string(smpc_status status);
/* Nonzero when the status reflects bad input rather than a numerical failure. */
SMPC_API int smpc_status_is_input_error(smpc_status status);
/* Message of the last failure on this thread; empty after a success. */
SMPC_API const char* smpc_last_error(void);

SMPC_API smpc_status smpc_scenario_load(const char* path, smpc_scenario** out);
SMPC_API smpc_status smpc_scenario_parse(const char* text, size_t length, smpc_scenario** out);
SMPC_API void smpc_scenario_free(smpc_scenario* scenario);

SMPC_API smpc_status smpc_scenario_set_seed(smpc_scenario* scenario, uint64_t seed);
SMPC_API smpc_status smpc_scenario_set_snapshots(smpc_scenario* scenario, smpc_snapshots policy);
SMPC_API smpc_status smpc_scenario_agents(const smpc_scenario* scenario, size_t* out);

/* String getters copy up to capacity bytes including the terminator and
 * always report the full size (terminator included) in *needed. */
SMPC_API smpc_status smpc_scenario_output_dir(const smpc_scenario* scenario, char* buffer,
                                              size_t capacity, size_t* needed);
SMPC_API smpc_status smpc_scenario_canonical_json(const smpc_scenario* scenario, char* buffer,
                                                  size_t capacity, size_t* needed);

/* Expands the scenario and builds every agent's MPC law. */
SMPC_API smpc_status smpc_validate(const smpc_scenario* scenario);

/* Runs the scenario; writes trajectories.csv, metrics.csv and summary.json
 * into out_dir when it is not null. summary may be null. */
SMPC_API smpc_status smpc_run(const smpc_scenario* scenario, smpc_mode mode, const char* out_dir,
                              smpc_run_summary* summary);

/* One run per epsilon (ascending); writes sweep.csv. failed_rows may be null. */
SMPC_API smpc_status smpc_sweep(const smpc_scenario* scenario, const double* epsilons,
                                size_t count, const char* out_dir, size_t* failed_rows);

/* Sinkhorn and Hungarian timings per (N, epsilon); writes bench.csv. */
SMPC_API smpc_status smpc_bench(const smpc_scenario* tmpl, const size_t* sizes, size_t size_count,
                                const double* epsilons, size_t epsilon_count, const char* out_dir);

/* Entropic OT on an n x m row-major cost matrix. a and b may be null for
 * uniform marginals. Stops when the marginal violation drops below
 * threshold. coupling receives n*m entries. */
SMPC_API smpc_status smpc_sinkhorn_solve(const double* cost, size_t n, size_t m, double epsilon,
                                         const double* a, const double* b, double threshold,
                                         long cap, double* coupling, long* iterations);

/* Minimum-cost assignment on an n x n cost matrix; sigma is 0-based. */
SMPC_API smpc_status smpc_hungarian(const double* cost, size_t n, size_t* sigma,
                                    double* total_cost);

#ifdef __cplusplus
}
#endif

#endif
