/*
 *     Copyright 2026 The rml authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#ifndef RML_RML_H_
#define RML_RML_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define RML_API __declspec(dllexport)
#else
#define RML_API __attribute__((visibility("default")))
#endif

/* Status codes. Every function returning rml_status stores a message for
 * rml_last_error() on failure. */
typedef enum rml_status {
  RML_OK = 0,
  RML_E_INVALID_ARGUMENT = 1,
  RML_E_DIMENSION_MISMATCH = 2,
  RML_E_NOT_POSITIVE_DEFINITE = 3,
  RML_E_UNSUPPORTED = 4,
  RML_E_SINGULAR = 5,
  RML_E_EVALUATION = 6,
  RML_E_INITIALIZATION = 7,
  RML_E_IO = 8,
  RML_E_CONFIG = 9,
  RML_E_INTERNAL = 100
} rml_status;

typedef enum rml_jacobian_mode {
  RML_JACOBIAN_FULL = 0,
  RML_JACOBIAN_GAUSS_NEWTON = 1,
  RML_JACOBIAN_NONE = 2
} rml_jacobian_mode;

typedef enum rml_algorithm {
  RML_ALGORITHM_AUGMENTED = 0,
  RML_ALGORITHM_LEGACY_1D = 1
} rml_algorithm;

typedef struct rml_problem rml_problem;
typedef struct rml_chain rml_chain;
typedef struct rml_grid rml_grid;

/* Message of the last failure on the calling thread; "" if none. */
RML_API const char* rml_last_error(void);
RML_API const char* rml_status_string(rml_status s);
RML_API const char* rml_version(void);

/* ---- problems ---------------------------------------------------------- */

/* "example1", "example2", "example3", "gauss-linear". */
RML_API rml_status rml_problem_builtin(const char* name, rml_problem** out);

/* g(x) = G x. Matrices are row-major: prior_cov dim_x*dim_x, G dim_d*dim_x,
 * obs_cov dim_d*dim_d. */
RML_API rml_status rml_problem_linear(const char* name, int dim_x, int dim_d,
                                      const double* prior_mean, const double* prior_cov,
                                      const double* G, const double* obs,
                                      const double* obs_cov, rml_problem** out);

RML_API void rml_problem_free(rml_problem* p);
RML_API int rml_problem_dim_x(const rml_problem* p);
RML_API int rml_problem_dim_d(const rml_problem* p);
/* 1 if the problem lives in a Gaussian latent variable (example3). */
RML_API int rml_problem_has_anamorphosis(const rml_problem* p);
/* Latent z to the original variable x. */
RML_API rml_status rml_problem_to_original(const rml_problem* p, double z, double* x);

RML_API rml_status rml_log_target_marginal(const rml_problem* p, const double* x,
                                           double* out);
RML_API rml_status rml_log_target_joint(const rml_problem* p, double gamma,
                                        const double* x, const double* d, double* out);
RML_API rml_status rml_log_prior_joint(const rml_problem* p, const double* x_uc,
                                       const double* d_uc, double* out);

/* ---- chains ------------------------------------------------------------ */

typedef struct rml_chain_settings {
  double rho;
  double gamma;
  int64_t n_steps;
  uint64_t seed;
  int jacobian;  /* rml_jacobian_mode */
  int algorithm; /* rml_algorithm */
  int workers;   /* threads precomputing proposals; output does not depend on it */
  /* optimizer */
  int max_iters;
  double grad_tol;
  double step_tol;
  double lm_lambda0;
  int exact_hessian;
  /* marginal proposal quadrature (legacy-1d) */
  int quad_nodes;
  double quad_half_width_sd;
} rml_chain_settings;

RML_API void rml_chain_settings_default(rml_chain_settings* s);

typedef struct rml_chain_summary {
  int64_t n_proposed;
  int64_t n_accepted;
  int64_t n_optfail;
  int64_t n_degenerate;
  double acceptance_rate;
  double acceptance_rate_valid; /* over proposals that produced a valid candidate */
  uint64_t seed;
} rml_chain_summary;

/* Warnings raised while sampling (e.g. zero marginal proposal density). */
typedef void (*rml_warning_callback)(const char* message, void* user);
/* NULL restores the default (stderr). */
RML_API void rml_set_warning_callback(rml_warning_callback cb, void* user);

RML_API rml_status rml_chain_run(const rml_problem* p, const rml_chain_settings* s,
                                 rml_chain** out);
RML_API void rml_chain_free(rml_chain* c);
RML_API rml_status rml_chain_summary_get(const rml_chain* c, rml_chain_summary* out);
/* Acceptance rate over the first n_steps steps. */
RML_API rml_status rml_chain_acceptance_prefix(const rml_chain* c, int64_t n_steps,
                                               double* rate);
/* State after step `step` (0 = initial state). Any output pointer may be NULL;
 * x needs dim_x entries, d needs dim_d. */
RML_API rml_status rml_chain_state(const rml_chain* c, int64_t step, double* x, double* d,
                                   double* log_pi, double* log_q, int* accepted);
RML_API rml_status rml_chain_write_trace(const rml_chain* c, const char* path);

/* ---- grids ------------------------------------------------------------- */

typedef struct rml_axis {
  double lo;
  double hi;
  int n;
} rml_axis;

/* axes: dim_x entries, or NULL for prior mean +- 6 sd with 401 nodes. */
RML_API rml_status rml_grid_marginal(const rml_problem* p, const rml_axis* axes,
                                     int workers, rml_grid** out);
/* Prior mean +- 6 prior sd per axis with n nodes; writes dim_x axes. */
RML_API rml_status rml_problem_default_axes(const rml_problem* p, int n, rml_axis* axes);
/* Joint target over (x, d) for dim_x = dim_d = 1. */
RML_API rml_status rml_grid_joint(const rml_problem* p, double gamma, rml_axis x_axis,
                                  rml_axis d_axis, int workers, rml_grid** out);
/* Proposal density over (x*, d*) for dim_x = dim_d = 1. */
RML_API rml_status rml_grid_proposal(const rml_problem* p, double rho, int jacobian,
                                     rml_axis x_axis, rml_axis d_axis, int workers,
                                     rml_grid** out);
/* Posterior in the original variable of a transformed problem (example3). */
RML_API rml_status rml_grid_original(const rml_problem* p, rml_axis axis, rml_grid** out);

RML_API void rml_grid_free(rml_grid* g);
RML_API int rml_grid_dims(const rml_grid* g);
RML_API size_t rml_grid_size(const rml_grid* g);
RML_API double rml_grid_log_normalizer(const rml_grid* g);
RML_API rml_status rml_grid_write_csv(const rml_grid* g, const char* path);
/* Strict discrete maxima. Writes up to `capacity` mode coordinates
 * (dims values each) and the total count to *n_modes. */
RML_API rml_status rml_grid_modes(const rml_grid* g, double* coords, size_t capacity,
                                  size_t* n_modes);
/* Basin masses in decreasing order; up to `capacity` entries. */
RML_API rml_status rml_grid_basin_masses(const rml_grid* g, double* masses,
                                         size_t capacity, size_t* n_basins);
/* Average conditional standard deviation of the second axis given the first. */
RML_API rml_status rml_grid_mean_conditional_sd(const rml_grid* g, double* out);
/* Correlation of the two axes of a 2-D grid density. */
RML_API rml_status rml_grid_correlation(const rml_grid* g, double* out);

typedef struct rml_comparison {
  double tv_distance;
  double outside_fraction;
  double mean_error[2];
  double variance_error[2];
} rml_comparison;

/* Compares the chain's x states after `discard` steps with the grid on
 * `bins` bins per axis. With to_original != 0 states are first mapped
 * through the problem's anamorphosis. hist_path may be NULL. */
RML_API rml_status rml_chain_compare_grid(const rml_chain* c, const rml_grid* g, int bins,
                                          int64_t discard, int to_original,
                                          const char* hist_path, rml_comparison* out);
/* Fractions of chain states (after `discard`) in each basin of g, in the
 * order of rml_grid_basin_masses. */
RML_API rml_status rml_chain_basin_occupation(const rml_chain* c, const rml_grid* g,
                                              int64_t discard, double* occupation,
                                              size_t capacity, size_t* n_basins);

/* ---- validation -------------------------------------------------------- */

typedef struct rml_validate_options {
  int fd_points;
  int roundtrip_draws;
  int64_t chain_steps;
  uint64_t seed;
  int workers;
  int rate_checks; /* also run the example 2 rho sweep */
} rml_validate_options;

RML_API void rml_validate_options_default(rml_validate_options* o);

typedef void (*rml_check_callback)(const char* name, int passed, double value,
                                   double tolerance, const char* detail, void* user);

/* Runs the property suite, reporting each check through cb. */
RML_API rml_status rml_validate(const rml_validate_options* o, rml_check_callback cb,
                                void* user, int* n_failed);

#ifdef __cplusplus
}
#endif

#endif /* RML_RML_H_ */
