// SPDX-License-Identifier: Apache-2.0
#include "deis/deis.h"

#include <algorithm>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "deis/coeffs.hpp"
#include "deis/csv.hpp"
#include "deis/error.hpp"
#include "deis/experiment.hpp"
#include "deis/metrics.hpp"
#include "deis/oracle.hpp"
#include "deis/profile.hpp"
#include "deis/sampler.hpp"
#include "deis/schedule.hpp"

struct deis_schedule {
  deis::NoiseSchedule value;
};
struct deis_mixture {
  deis::GaussianMixture value;
};
struct deis_profile {
  deis::ScoreMagnitudeProfile value;
};
struct deis_grid {
  deis::TimeGrid value;
};
struct deis_coeffs {
  deis::CoefficientTable value;
};
struct deis_config {
  deis::ExperimentConfig value;
  std::string output_dir;
};

namespace {

thread_local std::string g_last_error;

deis_status to_status(deis::ErrorCode code) {
  using deis::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return DEIS_ERR_INVALID_ARGUMENT;
    case ErrorCode::kOutOfRange: return DEIS_ERR_OUT_OF_RANGE;
    case ErrorCode::kDimensionMismatch: return DEIS_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kDegenerateDensity: return DEIS_ERR_DEGENERATE_DENSITY;
    case ErrorCode::kSingularReparameterisation: return DEIS_ERR_SINGULAR_REPARAMETERISATION;
    case ErrorCode::kMissingProfile: return DEIS_ERR_MISSING_PROFILE;
    case ErrorCode::kDuplicateNodes: return DEIS_ERR_DUPLICATE_NODES;
    case ErrorCode::kTableMismatch: return DEIS_ERR_TABLE_MISMATCH;
    case ErrorCode::kNonFinite: return DEIS_ERR_NON_FINITE;
    case ErrorCode::kConfig: return DEIS_ERR_CONFIG;
    case ErrorCode::kIo: return DEIS_ERR_IO;
    case ErrorCode::kNotSingleGaussian: return DEIS_ERR_NOT_SINGLE_GAUSSIAN;
  }
  return DEIS_ERR_INTERNAL;
}

/// Runs fn, translating exceptions into status codes and the last-error text.
template <class Fn>
deis_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DEIS_OK;
  } catch (const deis::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DEIS_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw deis::Error(deis::ErrorCode::kInvalidArgument, what);
}

deis::SamplerSpec to_spec(const deis_sampler_spec& s) {
  deis::SamplerSpec spec;
  switch (s.kind) {
    case DEIS_SAMPLER_DEIS: spec.kind = deis::SamplerKind::kDeis; break;
    case DEIS_SAMPLER_EULER: spec.kind = deis::SamplerKind::kEuler; break;
    case DEIS_SAMPLER_DDIM: spec.kind = deis::SamplerKind::kDdim; break;
    default: throw deis::Error(deis::ErrorCode::kInvalidArgument, "unknown sampler kind");
  }
  switch (s.reparam) {
    case DEIS_REPARAM_IDENTITY: spec.reparam = deis::ReparamKind::kIdentity; break;
    case DEIS_REPARAM_SIGMA: spec.reparam = deis::ReparamKind::kSigma; break;
    case DEIS_REPARAM_SCORE_NORM: spec.reparam = deis::ReparamKind::kScoreNorm; break;
    default: throw deis::Error(deis::ErrorCode::kInvalidArgument, "unknown reparameterisation");
  }
  switch (s.grid) {
    case DEIS_GRID_QUADRATIC: spec.grid = deis::GridKind::kTrailingQuadratic; break;
    case DEIS_GRID_LINEAR: spec.grid = deis::GridKind::kTrailingLinear; break;
    case DEIS_GRID_UNIFORM: spec.grid = deis::GridKind::kUniform; break;
    default: throw deis::Error(deis::ErrorCode::kInvalidArgument, "unknown grid kind");
  }
  if (s.order < 0) throw deis::Error(deis::ErrorCode::kInvalidArgument, "order must be >= 0");
  spec.order = s.order;
  return spec;
}

std::optional<std::filesystem::path> opt_path(const char* p) {
  if (p == nullptr || *p == '\0') return std::nullopt;
  return std::filesystem::path(p);
}

}  // namespace

extern "C" {

const char* deis_last_error(void) { return g_last_error.c_str(); }

const char* deis_status_name(deis_status status) {
  switch (status) {
    case DEIS_OK: return "ok";
    case DEIS_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case DEIS_ERR_OUT_OF_RANGE: return "out-of-range";
    case DEIS_ERR_DIMENSION_MISMATCH: return "dimension-mismatch";
    case DEIS_ERR_DEGENERATE_DENSITY: return "degenerate-density";
    case DEIS_ERR_SINGULAR_REPARAMETERISATION: return "singular-reparameterisation";
    case DEIS_ERR_MISSING_PROFILE: return "missing-profile";
    case DEIS_ERR_DUPLICATE_NODES: return "duplicate-nodes";
    case DEIS_ERR_TABLE_MISMATCH: return "table-mismatch";
    case DEIS_ERR_NON_FINITE: return "non-finite";
    case DEIS_ERR_CONFIG: return "config";
    case DEIS_ERR_IO: return "io";
    case DEIS_ERR_NOT_SINGLE_GAUSSIAN: return "not-single-gaussian";
    case DEIS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int deis_exit_code(deis_status status) {
  switch (status) {
    case DEIS_OK: return 0;
    case DEIS_ERR_CONFIG:
    case DEIS_ERR_INVALID_ARGUMENT:
    case DEIS_ERR_MISSING_PROFILE:
      return 2;
    case DEIS_ERR_NON_FINITE:
    case DEIS_ERR_DEGENERATE_DENSITY:
    case DEIS_ERR_SINGULAR_REPARAMETERISATION:
      return 3;
    default:
      return 1;
  }
}

deis_sampler_spec deis_default_sampler_spec(deis_sampler_kind kind) {
  switch (kind) {
    case DEIS_SAMPLER_EULER: return {kind, 0, DEIS_REPARAM_IDENTITY, DEIS_GRID_LINEAR};
    case DEIS_SAMPLER_DDIM: return {kind, 0, DEIS_REPARAM_SIGMA, DEIS_GRID_LINEAR};
    default: return {DEIS_SAMPLER_DEIS, 3, DEIS_REPARAM_SIGMA, DEIS_GRID_QUADRATIC};
  }
}

deis_status deis_schedule_create_vp_linear(double beta_min, double beta_max, int n_discrete,
                                           deis_schedule** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new deis_schedule{deis::NoiseSchedule::vp_linear(beta_min, beta_max, n_discrete)};
  });
}

void deis_schedule_destroy(deis_schedule* schedule) { delete schedule; }

deis_status deis_schedule_alpha_sigma(const deis_schedule* schedule, double t, double* alpha,
                                      double* sigma) {
  return guarded([&] {
    require(schedule && alpha && sigma, "null argument");
    const auto as = schedule->value.alpha_sigma(t);
    *alpha = as.alpha;
    *sigma = as.sigma;
  });
}

deis_status deis_schedule_drift_diffusion(const deis_schedule* schedule, double t, double* f,
                                          double* g2) {
  return guarded([&] {
    require(schedule && f && g2, "null argument");
    const auto dd = schedule->value.drift_diffusion(t);
    *f = dd.f;
    *g2 = dd.g2;
  });
}

deis_status deis_schedule_psi(const deis_schedule* schedule, double t, double u, double* out) {
  return guarded([&] {
    require(schedule && out, "null argument");
    *out = schedule->value.psi(t, u);
  });
}

deis_status deis_mixture_create(size_t dim, size_t n_components, const double* weights,
                                const double* means, const double* stds,
                                deis_mixture** out) {
  return guarded([&] {
    require(out && weights && means && stds, "null argument");
    std::vector<deis::MixtureComponent> comps(n_components);
    for (size_t k = 0; k < n_components; ++k) {
      comps[k].weight = weights[k];
      comps[k].std = stds[k];
      comps[k].mean.assign(means + k * dim, means + (k + 1) * dim);
    }
    *out = new deis_mixture{deis::GaussianMixture(dim, std::move(comps))};
  });
}

void deis_mixture_destroy(deis_mixture* mixture) { delete mixture; }

deis_status deis_mixture_score(const deis_mixture* mixture, const deis_schedule* schedule,
                               const double* x, double t, double* out) {
  return guarded([&] {
    require(mixture && schedule && x && out, "null argument");
    const auto d = mixture->value.dim();
    deis::gmm_score(mixture->value, schedule->value, {x, d}, t, {out, d});
  });
}

deis_status deis_mixture_exact_flow(const deis_mixture* mixture, const deis_schedule* schedule,
                                    const double* x_from, double t_from, double t_to,
                                    double* out) {
  return guarded([&] {
    require(mixture && schedule && x_from && out, "null argument");
    const auto d = mixture->value.dim();
    const auto y =
        deis::exact_gaussian_flow(mixture->value, schedule->value, {x_from, d}, t_from, t_to);
    std::copy(y.begin(), y.end(), out);
  });
}

deis_status deis_profile_collect(const deis_mixture* mixture, const deis_schedule* schedule,
                                 int nfe, int batch, uint64_t seed, double truncation,
                                 deis_profile** out) {
  return guarded([&] {
    require(mixture && schedule && out, "null argument");
    const deis::MixtureScore score(mixture->value, schedule->value);
    *out = new deis_profile{
        deis::collect_profile(score, schedule->value, nfe, batch, seed, truncation)};
  });
}

deis_status deis_profile_load_csv(const char* path, double truncation, deis_profile** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new deis_profile{deis::read_profile_csv(path, truncation)};
  });
}

deis_status deis_profile_save_csv(const deis_profile* profile, const char* path) {
  return guarded([&] {
    require(profile && path, "null argument");
    const auto& p = profile->value;
    const std::string meta = "seed=" + std::to_string(p.seed) + " batch=" +
                             std::to_string(p.batch_size) + " nfe=" +
                             std::to_string(p.nfe_used);
    deis::write_file_atomic(path, deis::format_profile_csv(p, {meta}));
  });
}

void deis_profile_destroy(deis_profile* profile) { delete profile; }

deis_status deis_profile_lookup(const deis_profile* profile, double t, double* out) {
  return guarded([&] {
    require(profile && out, "null argument");
    *out = deis::profile_lookup(profile->value, t);
  });
}

size_t deis_profile_size(const deis_profile* profile) {
  return profile ? profile->value.knots.size() : 0;
}

deis_status deis_profile_knots(const deis_profile* profile, double* knots, double* values,
                               size_t capacity) {
  return guarded([&] {
    require(profile != nullptr, "null argument");
    const auto n = std::min(capacity, profile->value.knots.size());
    if (knots) std::copy_n(profile->value.knots.begin(), n, knots);
    if (values) std::copy_n(profile->value.values.begin(), n, values);
  });
}

deis_status deis_grid_create(deis_grid_kind kind, int n_steps, deis_grid** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    deis_sampler_spec s{DEIS_SAMPLER_DEIS, 0, DEIS_REPARAM_SIGMA, kind};
    *out = new deis_grid{deis::make_time_grid(to_spec(s).grid, n_steps)};
  });
}

void deis_grid_destroy(deis_grid* grid) { delete grid; }

int deis_grid_steps(const deis_grid* grid) { return grid ? grid->value.steps() : 0; }

deis_status deis_grid_times(const deis_grid* grid, double* times, size_t capacity) {
  return guarded([&] {
    require(grid && times, "null argument");
    require(capacity >= grid->value.times.size(), "capacity too small");
    std::copy(grid->value.times.begin(), grid->value.times.end(), times);
  });
}

deis_status deis_coeffs_compute(const deis_grid* grid, int order, deis_reparam_kind reparam,
                                const deis_profile* profile, const deis_schedule* schedule,
                                int subdivisions, deis_coeffs** out) {
  return guarded([&] {
    require(grid && schedule && out, "null argument");
    deis_sampler_spec s{DEIS_SAMPLER_DEIS, order, reparam, DEIS_GRID_LINEAR};
    const auto rep =
        deis::Reparameterisation::make(to_spec(s).reparam, profile ? &profile->value : nullptr);
    *out = new deis_coeffs{
        deis::compute_coefficients(grid->value, order, rep, schedule->value, subdivisions)};
  });
}

void deis_coeffs_destroy(deis_coeffs* coeffs) { delete coeffs; }

deis_status deis_coeffs_step_order(const deis_coeffs* coeffs, int step, int* order) {
  return guarded([&] {
    require(coeffs && order, "null argument");
    *order = coeffs->value.step_order(step);
  });
}

deis_status deis_coeffs_get(const deis_coeffs* coeffs, int step, int j, double* out) {
  return guarded([&] {
    require(coeffs && out, "null argument");
    const auto row = coeffs->value.step(step);
    if (j < 0 || static_cast<size_t>(j) >= row.size()) {
      throw deis::Error(deis::ErrorCode::kOutOfRange, "coefficient index out of range");
    }
    *out = row[static_cast<size_t>(j)];
  });
}

deis_status deis_sample(const deis_mixture* mixture, const deis_schedule* schedule,
                        const deis_sampler_spec* spec, int nfe, const deis_profile* profile,
                        const double* x1, size_t batch, double* out, int* nfe_out) {
  return guarded([&] {
    require(mixture && schedule && spec && x1 && out, "null argument");
    const auto dim = mixture->value.dim();
    deis::Batch init(batch, dim);
    std::copy(x1, x1 + batch * dim, init.data.begin());
    const deis::MixtureScore score(mixture->value, schedule->value);
    const auto result = deis::run_sampler(to_spec(*spec), nfe, init, score, schedule->value,
                                          profile ? &profile->value : nullptr);
    std::copy(result.samples.data.begin(), result.samples.data.end(), out);
    if (nfe_out) *nfe_out = result.nfe;
  });
}

deis_status deis_terminal_rmse(const double* a, const double* b, size_t rows, size_t dim,
                               double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    deis::Batch x(rows, dim), y(rows, dim);
    std::copy(a, a + rows * dim, x.data.begin());
    std::copy(b, b + rows * dim, y.data.begin());
    *out = deis::terminal_rmse(x, y);
  });
}

deis_status deis_sliced_wasserstein(const double* a, const double* b, size_t rows, size_t dim,
                                    int projections, uint64_t seed, double* out) {
  return guarded([&] {
    require(a && b && out, "null argument");
    deis::Batch x(rows, dim), y(rows, dim);
    std::copy(a, a + rows * dim, x.data.begin());
    std::copy(b, b + rows * dim, y.data.begin());
    *out = deis::sliced_wasserstein(x, y, projections, seed);
  });
}

deis_status deis_config_load(const char* path, deis_config** out) {
  return guarded([&] {
    if (!path || !out) throw deis::Error(deis::ErrorCode::kConfig, "config path is null");
    auto cfg = deis::load_config(path);
    auto dir = cfg.output_dir.string();
    *out = new deis_config{std::move(cfg), std::move(dir)};
  });
}

void deis_config_destroy(deis_config* config) { delete config; }

const char* deis_config_output_dir(const deis_config* config) {
  return config ? config->output_dir.c_str() : "";
}

deis_status deis_run_profile(const deis_config* config, const char* out_path) {
  return guarded([&] {
    require(config && out_path, "null argument");
    deis::run_profile(config->value, out_path);
  });
}

deis_status deis_run_coeffs(const deis_config* config, const deis_sampler_spec* spec, int nfe,
                            const char* profile_path, const char* out_path) {
  return guarded([&] {
    require(config && spec && out_path, "null argument");
    deis::run_coeffs(config->value, to_spec(*spec), nfe, opt_path(profile_path), out_path);
  });
}

deis_status deis_run_sample(const deis_config* config, const deis_sampler_spec* spec, int nfe,
                            int batch, int has_seed, uint64_t seed, const char* profile_path,
                            const char* out_path) {
  return guarded([&] {
    require(config && spec && out_path, "null argument");
    deis::SampleRequest request;
    request.spec = to_spec(*spec);
    if (nfe > 0) request.nfe = nfe;
    if (batch > 0) request.batch = batch;
    if (has_seed) request.seed = seed;
    deis::run_sample(config->value, request, opt_path(profile_path), out_path);
  });
}

deis_status deis_run_converge(const deis_config* config, const char* profile_path,
                              const char* out_dir) {
  return guarded([&] {
    require(config != nullptr, "null argument");
    const auto dir = out_dir ? std::filesystem::path(out_dir) : config->value.output_dir;
    deis::run_converge(config->value, opt_path(profile_path), dir);
  });
}

deis_status deis_run_curves(const deis_config* config, const char* profile_path,
                            const char* out_path) {
  return guarded([&] {
    require(config && out_path, "null argument");
    deis::run_curves(config->value, opt_path(profile_path), out_path);
  });
}

}  // extern "C"
