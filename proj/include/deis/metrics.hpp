// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deis/batch.hpp"
#include "deis/oracle.hpp"
#include "deis/profile.hpp"
#include "deis/sampler.hpp"
#include "deis/schedule.hpp"

namespace deis {

/// Root mean square of per-coordinate differences over the whole batch.
double terminal_rmse(const Batch& samples, const Batch& reference);

/// Mean over `n_projections` random unit directions of the 1-D W2 distance
/// between the projected batches (sorted-sample formula, equal sizes only).
double sliced_wasserstein(const Batch& a, const Batch& b, int n_projections,
                          std::uint64_t seed);

struct CurveRow {
  double t;
  double s_bar;
  double sigma;
  double product;  // s_bar * sigma
};

/// s_bar, sigma_t and their product at every profile knot.
std::vector<CurveRow> score_curves(const NoiseSchedule& sched,
                                   const ScoreMagnitudeProfile& profile);

/// Least-squares convergence order: minus the slope of log(error) against
/// log(nfe). Absent with fewer than two usable points.
std::optional<double> fit_convergence_order(std::span<const int> nfe,
                                            std::span<const double> error);

enum class MetricKind { kAuto, kRmse, kSlicedWasserstein };

std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& name);

struct ReportPoint {
  int nfe = 0;
  double value = 0.0;
  std::string error;  // non-empty when the cell failed
};

struct ConvergenceReport {
  std::string sampler;  // e.g. "deis-tab3"
  std::string reparam;
  std::string grid;
  std::string metric;  // "rmse", "sliced-wasserstein", "rmse-reference"
  std::vector<ReportPoint> points;
  std::optional<double> slope;
  std::uint64_t seed = 0;
  std::string oracle;
};

struct StudyConfig {
  NoiseSchedule schedule;
  GaussianMixture mixture;
  std::vector<SamplerSpec> samplers;
  std::vector<int> nfe;
  int batch = 256;
  std::uint64_t seed = 0;
  MetricKind metric = MetricKind::kAuto;
  int projections = 64;
  /// Steps of the third-order DEIS reference run for the trajectory-matched
  /// GMM metric; 0 disables it.
  int reference_nfe = 0;
  int subdivisions = kDefaultSubdivisions;
  int threads = 1;
  const ScoreMagnitudeProfile* profile = nullptr;
};

/// Error-versus-NFE sweep. Every sampler starts from the same x_1 batch.
/// Failing cells are recorded in their point and do not stop the sweep.
std::vector<ConvergenceReport> convergence_study(const StudyConfig& config);

std::string describe_mixture(const GaussianMixture& mix);

}  // namespace deis
