/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the DEIS sampling library.
 *
 * Every function returns a deis_status. On failure the thread-local message
 * from deis_last_error() describes what went wrong. Objects are opaque
 * handles created by *_create / *_load / *_compute functions and released
 * with the matching *_destroy function; destroy functions accept NULL.
 */
#ifndef DEIS_DEIS_H
#define DEIS_DEIS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DEIS_API __declspec(dllexport)
#else
#define DEIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum deis_status {
  DEIS_OK = 0,
  DEIS_ERR_INVALID_ARGUMENT = 1,
  DEIS_ERR_OUT_OF_RANGE = 2,
  DEIS_ERR_DIMENSION_MISMATCH = 3,
  DEIS_ERR_DEGENERATE_DENSITY = 4,
  DEIS_ERR_SINGULAR_REPARAMETERISATION = 5,
  DEIS_ERR_MISSING_PROFILE = 6,
  DEIS_ERR_DUPLICATE_NODES = 7,
  DEIS_ERR_TABLE_MISMATCH = 8,
  DEIS_ERR_NON_FINITE = 9,
  DEIS_ERR_CONFIG = 10,
  DEIS_ERR_IO = 11,
  DEIS_ERR_NOT_SINGLE_GAUSSIAN = 12,
  DEIS_ERR_INTERNAL = 13
} deis_status;

typedef enum deis_sampler_kind {
  DEIS_SAMPLER_DEIS = 0,
  DEIS_SAMPLER_EULER = 1,
  DEIS_SAMPLER_DDIM = 2
} deis_sampler_kind;

typedef enum deis_reparam_kind {
  DEIS_REPARAM_IDENTITY = 0,
  DEIS_REPARAM_SIGMA = 1,
  DEIS_REPARAM_SCORE_NORM = 2
} deis_reparam_kind;

typedef enum deis_grid_kind {
  DEIS_GRID_QUADRATIC = 0,
  DEIS_GRID_LINEAR = 1,
  DEIS_GRID_UNIFORM = 2
} deis_grid_kind;

typedef struct deis_sampler_spec {
  deis_sampler_kind kind;
  int order;
  deis_reparam_kind reparam;
  deis_grid_kind grid;
} deis_sampler_spec;

typedef struct deis_schedule deis_schedule;
typedef struct deis_mixture deis_mixture;
typedef struct deis_profile deis_profile;
typedef struct deis_grid deis_grid;
typedef struct deis_coeffs deis_coeffs;
typedef struct deis_config deis_config;

DEIS_API const char* deis_last_error(void);
DEIS_API const char* deis_status_name(deis_status status);
/* Process exit code for a status: 0 ok, 2 config, 3 numerical, 1 other. */
DEIS_API int deis_exit_code(deis_status status);

/* Defaults for a sampler kind (DEIS: order 3, sigma, quadratic grid). */
DEIS_API deis_sampler_spec deis_default_sampler_spec(deis_sampler_kind kind);

/* ---- schedule ---------------------------------------------------------- */
DEIS_API deis_status deis_schedule_create_vp_linear(double beta_min, double beta_max,
                                                    int n_discrete, deis_schedule** out);
DEIS_API void deis_schedule_destroy(deis_schedule* schedule);
DEIS_API deis_status deis_schedule_alpha_sigma(const deis_schedule* schedule, double t,
                                               double* alpha, double* sigma);
DEIS_API deis_status deis_schedule_drift_diffusion(const deis_schedule* schedule, double t,
                                                   double* f, double* g2);
DEIS_API deis_status deis_schedule_psi(const deis_schedule* schedule, double t, double u,
                                       double* out);

/* ---- Gaussian-mixture oracle ------------------------------------------- */
/* means is row-major, n_components x dim. */
DEIS_API deis_status deis_mixture_create(size_t dim, size_t n_components,
                                         const double* weights, const double* means,
                                         const double* stds, deis_mixture** out);
DEIS_API void deis_mixture_destroy(deis_mixture* mixture);
DEIS_API deis_status deis_mixture_score(const deis_mixture* mixture,
                                        const deis_schedule* schedule, const double* x,
                                        double t, double* out);
DEIS_API deis_status deis_mixture_exact_flow(const deis_mixture* mixture,
                                             const deis_schedule* schedule,
                                             const double* x_from, double t_from,
                                             double t_to, double* out);

/* ---- score-magnitude profile ------------------------------------------- */
DEIS_API deis_status deis_profile_collect(const deis_mixture* mixture,
                                          const deis_schedule* schedule, int nfe,
                                          int batch, uint64_t seed, double truncation,
                                          deis_profile** out);
DEIS_API deis_status deis_profile_load_csv(const char* path, double truncation,
                                           deis_profile** out);
DEIS_API deis_status deis_profile_save_csv(const deis_profile* profile, const char* path);
DEIS_API void deis_profile_destroy(deis_profile* profile);
DEIS_API deis_status deis_profile_lookup(const deis_profile* profile, double t, double* out);
DEIS_API size_t deis_profile_size(const deis_profile* profile);
/* Copies min(capacity, size) knots and values. */
DEIS_API deis_status deis_profile_knots(const deis_profile* profile, double* knots,
                                        double* values, size_t capacity);

/* ---- time grid and coefficients ---------------------------------------- */
DEIS_API deis_status deis_grid_create(deis_grid_kind kind, int n_steps, deis_grid** out);
DEIS_API void deis_grid_destroy(deis_grid* grid);
DEIS_API int deis_grid_steps(const deis_grid* grid);
/* times[i] = t_i for i = 0..steps; capacity must be at least steps + 1. */
DEIS_API deis_status deis_grid_times(const deis_grid* grid, double* times, size_t capacity);

/* profile may be NULL unless reparam is DEIS_REPARAM_SCORE_NORM. */
DEIS_API deis_status deis_coeffs_compute(const deis_grid* grid, int order,
                                         deis_reparam_kind reparam,
                                         const deis_profile* profile,
                                         const deis_schedule* schedule, int subdivisions,
                                         deis_coeffs** out);
DEIS_API void deis_coeffs_destroy(deis_coeffs* coeffs);
/* Effective order r' of step i (1..N); C_{i,0..r'} exist. */
DEIS_API deis_status deis_coeffs_step_order(const deis_coeffs* coeffs, int step, int* order);
DEIS_API deis_status deis_coeffs_get(const deis_coeffs* coeffs, int step, int j, double* out);

/* ---- sampling and metrics ---------------------------------------------- */
/* Integrates batch rows of x1 (row-major, batch x dim) from t = 1 to t = 0
 * with the mixture's exact score. out has the same shape. nfe_out may be NULL. */
DEIS_API deis_status deis_sample(const deis_mixture* mixture, const deis_schedule* schedule,
                                 const deis_sampler_spec* spec, int nfe,
                                 const deis_profile* profile, const double* x1,
                                 size_t batch, double* out, int* nfe_out);
DEIS_API deis_status deis_terminal_rmse(const double* a, const double* b, size_t rows,
                                        size_t dim, double* out);
DEIS_API deis_status deis_sliced_wasserstein(const double* a, const double* b, size_t rows,
                                             size_t dim, int projections, uint64_t seed,
                                             double* out);

/* ---- experiment pipelines (used by the CLI) ---------------------------- */
DEIS_API deis_status deis_config_load(const char* path, deis_config** out);
DEIS_API void deis_config_destroy(deis_config* config);
/* Output directory named by [output] dir. */
DEIS_API const char* deis_config_output_dir(const deis_config* config);

/* profile_path may be NULL: the profile is then built from the config. */
DEIS_API deis_status deis_run_profile(const deis_config* config, const char* out_path);
DEIS_API deis_status deis_run_coeffs(const deis_config* config, const deis_sampler_spec* spec,
                                     int nfe, const char* profile_path, const char* out_path);
/* nfe, batch <= 0 and has_seed == 0 take the config values. */
DEIS_API deis_status deis_run_sample(const deis_config* config, const deis_sampler_spec* spec,
                                     int nfe, int batch, int has_seed, uint64_t seed,
                                     const char* profile_path, const char* out_path);
DEIS_API deis_status deis_run_converge(const deis_config* config, const char* profile_path,
                                       const char* out_dir);
DEIS_API deis_status deis_run_curves(const deis_config* config, const char* profile_path,
                                     const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* DEIS_DEIS_H */
