// SPDX-License-Identifier: Apache-2.0
#include "deis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "deis/csv.hpp"
#include "deis/error.hpp"

namespace deis {

double terminal_rmse(const Batch& samples, const Batch& reference) {
  if (samples.rows != reference.rows || samples.dim != reference.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "terminal_rmse: batch shapes differ");
  }
  if (samples.data.empty()) throw Error(ErrorCode::kInvalidArgument, "terminal_rmse: empty batch");
  double acc = 0.0;
  for (std::size_t i = 0; i < samples.data.size(); ++i) {
    const double d = samples.data[i] - reference.data[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(samples.data.size()));
}

double sliced_wasserstein(const Batch& a, const Batch& b, int n_projections,
                          std::uint64_t seed) {
  if (a.rows == 0 || b.rows == 0) {
    throw Error(ErrorCode::kInvalidArgument, "sliced_wasserstein: empty batch");
  }
  if (a.dim != b.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "sliced_wasserstein: dimensions differ");
  }
  if (a.rows != b.rows) {
    throw Error(ErrorCode::kInvalidArgument,
                "sliced_wasserstein: batches must have equal size");
  }
  if (n_projections < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sliced_wasserstein: n_projections must be >= 1");
  }
  std::vector<double> dir(a.dim), pa(a.rows), pb(b.rows);
  double total = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(p), RngPurpose::kProjection));
    std::normal_distribution<double> normal;
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& v : dir) v /= norm;

    auto project = [&](const Batch& x, std::vector<double>& out) {
      for (std::size_t i = 0; i < x.rows; ++i) {
        const auto row = x.row(i);
        double acc = 0.0;
        for (std::size_t d = 0; d < row.size(); ++d) acc += row[d] * dir[d];
        out[i] = acc;
      }
      std::sort(out.begin(), out.end());
    };
    project(a, pa);
    project(b, pb);
    double acc = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double d = pa[i] - pb[i];
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(pa.size()));
  }
  return total / n_projections;
}

std::vector<CurveRow> score_curves(const NoiseSchedule& sched,
                                   const ScoreMagnitudeProfile& profile) {
  std::vector<CurveRow> rows;
  rows.reserve(profile.knots.size());
  for (double t : profile.knots) {
    const double s_bar = profile_lookup(profile, t);
    const double sigma = sched.sigma(t);
    rows.push_back({t, s_bar, sigma, s_bar * sigma});
  }
  return rows;
}

std::optional<double> fit_convergence_order(std::span<const int> nfe,
                                            std::span<const double> error) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < nfe.size() && i < error.size(); ++i) {
    if (nfe[i] > 0 && error[i] > 0.0 && std::isfinite(error[i])) {
      xs.push_back(std::log(static_cast<double>(nfe[i])));
      ys.push_back(std::log(error[i]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return -sxy / sxx;
}

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kAuto: return "auto";
    case MetricKind::kRmse: return "rmse";
    case MetricKind::kSlicedWasserstein: return "sliced-wasserstein";
  }
  return "unknown";
}

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "auto") return MetricKind::kAuto;
  if (name == "rmse") return MetricKind::kRmse;
  if (name == "sliced-wasserstein") return MetricKind::kSlicedWasserstein;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
}

std::string describe_mixture(const GaussianMixture& mix) {
  std::ostringstream ss;
  ss << (mix.is_single_gaussian() ? "gaussian" : "gmm") << " dim=" << mix.dim()
     << " components=" << mix.components().size();
  return ss.str();
}

std::vector<ConvergenceReport> convergence_study(const StudyConfig& config) {
  if (config.nfe.empty()) throw Error(ErrorCode::kInvalidArgument, "study needs NFE values");
  for (std::size_t i = 0; i < config.nfe.size(); ++i) {
    if (config.nfe[i] < 1 || (i > 0 && config.nfe[i] <= config.nfe[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "study NFE values must be positive and increasing");
    }
  }
  if (config.batch < 1) throw Error(ErrorCode::kInvalidArgument, "study batch must be >= 1");

  MetricKind metric = config.metric;
  if (metric == MetricKind::kAuto) {
    metric = config.mixture.is_single_gaussian() ? MetricKind::kRmse
                                                 : MetricKind::kSlicedWasserstein;
  }
  if (metric == MetricKind::kRmse && !config.mixture.is_single_gaussian()) {
    throw Error(ErrorCode::kInvalidArgument,
                "rmse metric needs a single-Gaussian oracle with an exact flow");
  }

  const MixtureScore score(config.mixture, config.schedule);
  const auto x1 = standard_normal_batch(static_cast<std::size_t>(config.batch),
                                        config.mixture.dim(), config.seed);
  RunOptions options;
  options.threads = config.threads;

  Batch reference;
  Batch direct;
  if (metric == MetricKind::kRmse) {
    reference = exact_gaussian_flow(config.mixture, config.schedule, x1, 1.0, 0.0);
  } else {
    direct = sample_mixture(config.mixture, x1.rows, config.seed);
    if (config.reference_nfe > 0) {
      reference = run_sampler(default_spec(SamplerKind::kDeis), config.reference_nfe,
                              x1, score, config.schedule, nullptr,
                              config.subdivisions, options)
                      .samples;
    }
  }

  std::vector<ConvergenceReport> reports;
  const auto oracle = describe_mixture(config.mixture);
  for (const auto& spec : config.samplers) {
    ConvergenceReport primary{spec.sampler_id(), to_string(spec.reparam),
                              to_string(spec.grid), to_string(metric), {},
                              std::nullopt, config.seed, oracle};
    ConvergenceReport matched = primary;
    matched.metric = "rmse-reference";
    for (int nfe : config.nfe) {
      ReportPoint cell{nfe, std::nan(""), {}};
      ReportPoint matched_cell = cell;
      try {
        const auto run = run_sampler(spec, nfe, x1, score, config.schedule,
                                     config.profile, config.subdivisions, options);
        if (metric == MetricKind::kRmse) {
          cell.value = terminal_rmse(run.samples, reference);
        } else {
          cell.value = sliced_wasserstein(run.samples, direct, config.projections,
                                          config.seed);
          if (!reference.data.empty()) {
            matched_cell.value = terminal_rmse(run.samples, reference);
          }
        }
      } catch (const Error& e) {
        cell.error = e.what();
        matched_cell.error = e.what();
      }
      primary.points.push_back(cell);
      matched.points.push_back(matched_cell);
    }
    auto fit = [](ConvergenceReport& r) {
      std::vector<int> n;
      std::vector<double> v;
      for (const auto& p : r.points) {
        if (p.error.empty()) {
          n.push_back(p.nfe);
          v.push_back(p.value);
        }
      }
      r.slope = fit_convergence_order(n, v);
    };
    fit(primary);
    reports.push_back(std::move(primary));
    if (!reference.data.empty() && metric != MetricKind::kRmse) {
      fit(matched);
      reports.push_back(std::move(matched));
    }
  }
  return reports;
}

}  // namespace deis
