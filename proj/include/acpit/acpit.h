/*
 * Copyright (c) 2026, acpit developers
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the acpit parallel-in-time Allen-Cahn solver.
 *
 * Objects are opaque handles created by acpit_*_create/load functions and
 * released with the matching *_destroy. Every fallible call returns an
 * acpit_status; on failure acpit_last_error() describes the problem for the
 * calling thread until its next failing call.
 */
#ifndef ACPIT_ACPIT_H
#define ACPIT_ACPIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ACPIT_API __declspec(dllexport)
#else
#define ACPIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acpit_status {
  ACPIT_OK = 0,
  ACPIT_ERR_CONFIG = 1,
  ACPIT_ERR_DOMAIN = 2,
  ACPIT_ERR_STRUCTURAL = 3,
  ACPIT_ERR_FORMAT = 4,
  ACPIT_ERR_IO = 5,
  ACPIT_ERR_NONCONVERGENCE = 6,
  ACPIT_ERR_DIVERGENCE = 7,
  ACPIT_ERR_NUMERICAL = 8,
  ACPIT_ERR_INTERNAL = 9
} acpit_status;

typedef enum acpit_model_kind { ACPIT_CLASSIC = 0, ACPIT_MASS_CONSERVATIVE = 1 } acpit_model_kind;
typedef enum acpit_optimizer { ACPIT_OPT_ADAM = 0, ACPIT_OPT_SGD = 1 } acpit_optimizer;

typedef struct acpit_grid acpit_grid;
typedef struct acpit_field acpit_field;
typedef struct acpit_model acpit_model;
typedef struct acpit_parareal_result acpit_parareal_result;

/* Error reporting ---------------------------------------------------------- */

ACPIT_API const char* acpit_last_error(void);
/* Short machine-readable class, e.g. "config" or "nonconvergence". */
ACPIT_API const char* acpit_status_name(acpit_status status);
ACPIT_API const char* acpit_version(void);

/* Grid and fields ---------------------------------------------------------- */

ACPIT_API acpit_status acpit_grid_create(int dim, int n, double length, acpit_grid** out);
ACPIT_API void acpit_grid_destroy(acpit_grid* grid);
ACPIT_API int acpit_grid_dim(const acpit_grid* grid);
ACPIT_API int acpit_grid_n(const acpit_grid* grid);
ACPIT_API double acpit_grid_length(const acpit_grid* grid);
ACPIT_API double acpit_grid_spacing(const acpit_grid* grid);
ACPIT_API size_t acpit_grid_size(const acpit_grid* grid);

/* Zero field on `grid`. */
ACPIT_API acpit_status acpit_field_create(const acpit_grid* grid, acpit_field** out);
ACPIT_API acpit_status acpit_field_clone(const acpit_field* field, acpit_field** out);
ACPIT_API void acpit_field_destroy(acpit_field* field);
ACPIT_API size_t acpit_field_size(const acpit_field* field);
ACPIT_API const double* acpit_field_data(const acpit_field* field);
ACPIT_API double* acpit_field_data_mut(acpit_field* field);
/* New grid handle describing the field's grid. */
ACPIT_API acpit_status acpit_field_grid(const acpit_field* field, acpit_grid** out);

ACPIT_API acpit_status acpit_field_write(const acpit_field* field, const char* path);
ACPIT_API acpit_status acpit_field_read(const char* path, acpit_field** out);

/* Physics ------------------------------------------------------------------- */

typedef struct acpit_physics {
  int kind; /* acpit_model_kind */
  double epsilon;
} acpit_physics;

ACPIT_API void acpit_mbp_bounds(int kind, double* lo, double* hi);
ACPIT_API acpit_status acpit_ic_bubbles(const acpit_grid* grid, double eps, acpit_field** out);
ACPIT_API acpit_status acpit_ic_random(const acpit_grid* grid, double amplitude, uint64_t seed, acpit_field** out);
ACPIT_API acpit_status acpit_ic_star(const acpit_grid* grid, double eps, acpit_field** out);
ACPIT_API const char* acpit_star_formula(void);
ACPIT_API double acpit_total_mass(const acpit_field* field);
ACPIT_API acpit_status acpit_discrete_energy(const acpit_field* field, acpit_physics physics, double* energy);
/* `absolute` is set to 1 when the reference is zero and the absolute norm is returned. */
ACPIT_API acpit_status acpit_rel_l2_error(const acpit_field* u, const acpit_field* ref, double* error, int* absolute);

/* Fine solver --------------------------------------------------------------- */

typedef struct acpit_stepper_config {
  acpit_physics physics;
  double dt;
  double picard_tol;
  int picard_max_iter;
} acpit_stepper_config;

ACPIT_API acpit_stepper_config acpit_stepper_defaults(void);
ACPIT_API acpit_status acpit_cn_step(const acpit_field* u, const acpit_stepper_config* cfg, acpit_field** out,
                                     int* picard_iters);
ACPIT_API acpit_status acpit_fine_propagate(const acpit_field* u, double t_start, double t_end,
                                            const acpit_stepper_config* cfg, acpit_field** out);

/* Receives each snapshot; the field is only valid during the call. */
typedef void (*acpit_snapshot_fn)(void* user, long step, double time, const acpit_field* u);
typedef void (*acpit_diagnostics_fn)(void* user, long step, double time, double mass, double energy,
                                     int picard_iters);

ACPIT_API acpit_status acpit_reference_run(const acpit_field* u0, double t_final, const acpit_stepper_config* cfg,
                                           int snapshot_every, acpit_snapshot_fn on_snapshot,
                                           acpit_diagnostics_fn on_diagnostics, void* user);

/* Surrogate network -------------------------------------------------------- */

typedef struct acpit_arch {
  int dim;
  int channels;
  int res_blocks;
  int kernel;
  int kind; /* acpit_model_kind */
} acpit_arch;

ACPIT_API acpit_arch acpit_arch_defaults(int dim, int kind);
ACPIT_API acpit_status acpit_model_init(const acpit_arch* arch, uint64_t seed, acpit_model** out);
ACPIT_API acpit_status acpit_model_load(const char* path, acpit_model** out);
ACPIT_API acpit_status acpit_model_save(const acpit_model* model, const char* path);
ACPIT_API void acpit_model_destroy(acpit_model* model);
ACPIT_API acpit_arch acpit_model_arch(const acpit_model* model);
ACPIT_API size_t acpit_model_parameter_count(const acpit_model* model);
ACPIT_API acpit_status acpit_model_forward(const acpit_model* model, const acpit_field* u, acpit_field** out);
/* Applies the network `composition` times per coarse step for `steps` coarse
 * steps, reporting the initial state and every coarse step. */
ACPIT_API acpit_status acpit_model_rollout(const acpit_model* model, const acpit_field* u0, int composition,
                                           int steps, acpit_snapshot_fn on_snapshot, void* user);

/* Training ------------------------------------------------------------------ */

typedef struct acpit_train_config {
  int r_total;
  int subsets;
  int subset_size;
  int inner_updates;
  double t_train;
  double dt;
  int epochs;
  double learning_rate;
  uint64_t seed;
  uint64_t init_seed;
  int has_init_seed;
  int optimizer; /* acpit_optimizer */
  int cosine_decay;
  /* Optional directory for per-epoch checkpoints; may be NULL. */
  const char* checkpoint_dir;
} acpit_train_config;

typedef void (*acpit_train_log_fn)(void* user, int epoch, int subset, int step, int update, double loss);
typedef void (*acpit_stability_row_fn)(void* user, double time, double mean_err, double std_err, int n_runs);

ACPIT_API acpit_train_config acpit_train_defaults(void);
ACPIT_API acpit_status acpit_train(const acpit_train_config* cfg, const acpit_arch* arch, acpit_physics physics,
                                   const acpit_grid* grid, acpit_train_log_fn on_update, void* user,
                                   acpit_model** out);
ACPIT_API acpit_status acpit_stability_study(const acpit_train_config* cfg, const acpit_arch* arch,
                                             acpit_physics physics, const acpit_grid* grid, int n_runs,
                                             const acpit_field* eval_u0, int eval_steps, int sample_every,
                                             int workers, acpit_stability_row_fn on_row, void* user,
                                             int* failed_runs);

/* Parareal ------------------------------------------------------------------ */

typedef struct acpit_parareal_config {
  int s;
  double dt_coarse;
  double dt_fine;
  double tol;
  int max_iter;
  int workers;
  /* Network evaluations per coarse step. */
  int coarse_composition;
} acpit_parareal_config;

typedef struct acpit_iteration {
  int k;
  double sup_increment;
  double rel_l2_vs_fine;
  double t_coarse_s;
  double t_fine_s;
  double t_wall_s;
} acpit_iteration;

/* `coarse` may be NULL, in which case the fine solver is also used as the
 * coarse propagator. With `with_reference` non-zero the sequential fine
 * trajectory is computed first and every iteration reports its error. */
ACPIT_API acpit_status acpit_parareal_run(const acpit_field* u0, const acpit_parareal_config* cfg,
                                          const acpit_model* coarse, const acpit_stepper_config* fine,
                                          int with_reference, acpit_parareal_result** out);
ACPIT_API void acpit_parareal_result_destroy(acpit_parareal_result* result);
/* Number of iterations executed (records k = 0..iterations). */
ACPIT_API int acpit_parareal_iterations(const acpit_parareal_result* result);
ACPIT_API int acpit_parareal_converged(const acpit_parareal_result* result);
ACPIT_API acpit_status acpit_parareal_record(const acpit_parareal_result* result, int k, acpit_iteration* out);
ACPIT_API int acpit_parareal_slices(const acpit_parareal_result* result);
/* Borrowed pointer, valid until the result is destroyed. */
ACPIT_API const acpit_field* acpit_parareal_slice(const acpit_parareal_result* result, int j);

ACPIT_API acpit_status acpit_speedup_model(int s, int k, int c, double t_nn, double t_num, double* total_time,
                                           double* speedup, double* bound);

typedef void (*acpit_bench_row_fn)(void* user, int workers, int k, double t_wall_s, double t_model_s,
                                   double baseline_s);

ACPIT_API acpit_status acpit_bench(const acpit_field* u0, const acpit_parareal_config* cfg,
                                   const acpit_model* coarse, const acpit_stepper_config* fine,
                                   const int* worker_counts, size_t n_worker_counts, acpit_bench_row_fn on_row,
                                   void* user, double* t_nn, double* t_num);

#ifdef __cplusplus
}
#endif

#endif /* ACPIT_ACPIT_H */
