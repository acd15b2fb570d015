// SPDX-License-Identifier: Apache-2.0
#include "deis/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "deis/error.hpp"

namespace deis {
namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": expected dimension " +
                    std::to_string(expected) + ", got " + std::to_string(got));
  }
}

double squared_distance(std::span<const double> x, std::span<const double> mu,
                        double scale) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - scale * mu[i];
    d2 += d * d;
  }
  return d2;
}

}  // namespace

GaussianMixture::GaussianMixture(std::size_t dim,
                                 std::vector<MixtureComponent> components)
    : dim_(dim), components_(std::move(components)) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "mixture dim must be > 0");
  if (components_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mixture needs at least one component");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    const auto tag = "component " + std::to_string(k);
    if (c.mean.size() != dim_) {
      throw Error(ErrorCode::kDimensionMismatch, tag + ": mean has wrong dimension");
    }
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": weight must be positive");
    }
    if (!(c.std > 0.0) || !std::isfinite(c.std)) {
      throw Error(ErrorCode::kInvalidArgument, tag + ": std must be positive");
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) {
        throw Error(ErrorCode::kInvalidArgument, tag + ": mean must be finite");
      }
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "mixture weights must sum to 1");
  }
}

std::vector<MarginalComponent> gmm_marginal(const GaussianMixture& mix,
                                            const NoiseSchedule& sched,
                                            double t) {
  const auto [a, sigma] = sched.alpha_sigma(t);
  std::vector<MarginalComponent> out;
  out.reserve(mix.components().size());
  for (const auto& c : mix.components()) {
    MarginalComponent m{c.weight, c.mean, a * a * c.std * c.std + sigma * sigma};
    for (double& v : m.mean) v *= a;
    out.push_back(std::move(m));
  }
  return out;
}

void gmm_score(const GaussianMixture& mix, const NoiseSchedule& sched,
               std::span<const double> x, double t, std::span<double> out) {
  check_dim(mix.dim(), x.size(), "gmm_score x");
  check_dim(mix.dim(), out.size(), "gmm_score out");
  const auto [a, sigma] = sched.alpha_sigma(t);
  const double half_dim = 0.5 * static_cast<double>(mix.dim());
  const auto comps = mix.components();

  // Two passes: the first finds the largest log-term, the second accumulates
  // normalised responsibilities without storing them.
  auto variance = [&](const MixtureComponent& c) {
    const double v = a * a * c.std * c.std + sigma * sigma;
    if (!(v > 0.0)) {
      throw Error(ErrorCode::kDegenerateDensity,
                  "gmm_score: zero component variance at t = " + std::to_string(t));
    }
    return v;
  };
  auto log_term = [&](const MixtureComponent& c, double v) {
    return std::log(c.weight) - 0.5 * squared_distance(x, c.mean, a) / v -
           half_dim * std::log(v);
  };

  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& c : comps) max_log = std::max(max_log, log_term(c, variance(c)));

  std::fill(out.begin(), out.end(), 0.0);
  double norm = 0.0;
  for (const auto& c : comps) {
    const double v = variance(c);
    const double gamma = std::exp(log_term(c, v) - max_log);
    norm += gamma;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out[i] += gamma * (a * c.mean[i] - x[i]) / v;
    }
  }
  for (double& s : out) s /= norm;
}

std::vector<double> gmm_score(const GaussianMixture& mix,
                              const NoiseSchedule& sched,
                              std::span<const double> x, double t) {
  std::vector<double> out(mix.dim());
  gmm_score(mix, sched, x, t, out);
  return out;
}

Batch sample_mixture(const GaussianMixture& mix, std::size_t rows,
                     std::uint64_t seed) {
  Batch out(rows, mix.dim());
  const auto comps = mix.components();
  for (std::size_t i = 0; i < rows; ++i) {
    std::mt19937_64 rng(stream_seed(seed, i, RngPurpose::kMixtureDraw));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal;
    const double u = uniform(rng);
    std::size_t k = 0;
    double acc = comps[0].weight;
    while (u >= acc && k + 1 < comps.size()) acc += comps[++k].weight;
    auto row = out.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      row[d] = comps[k].mean[d] + comps[k].std * normal(rng);
    }
  }
  return out;
}

std::vector<double> convert_parameterisation(std::span<const double> score,
                                             std::span<const double> x,
                                             double t,
                                             const NoiseSchedule& sched,
                                             Parameterisation target) {
  check_dim(score.size(), x.size(), "convert_parameterisation");
  const auto [a, sigma] = sched.alpha_sigma(t);
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "convert_parameterisation: sigma_t = 0");
  }
  std::vector<double> out(score.size());
  if (target == Parameterisation::kNoisePrediction) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -sigma * score[i];
  } else {
    if (!(a > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "convert_parameterisation: a_t = 0");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (x[i] + sigma * sigma * score[i]) / a;
    }
  }
  return out;
}

std::vector<double> score_from_parameterisation(std::span<const double> value,
                                                std::span<const double> x,
                                                double t,
                                                const NoiseSchedule& sched,
                                                Parameterisation source) {
  check_dim(value.size(), x.size(), "score_from_parameterisation");
  const auto [a, sigma] = sched.alpha_sigma(t);
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "score_from_parameterisation: sigma_t = 0");
  }
  std::vector<double> out(value.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = source == Parameterisation::kNoisePrediction
                 ? -value[i] / sigma
                 : (a * value[i] - x[i]) / (sigma * sigma);
  }
  return out;
}

std::vector<double> exact_gaussian_flow(const GaussianMixture& mix,
                                        const NoiseSchedule& sched,
                                        std::span<const double> x_from,
                                        double t_from, double t_to) {
  if (!mix.is_single_gaussian()) {
    throw Error(ErrorCode::kNotSingleGaussian,
                "exact_gaussian_flow needs a single-component mixture");
  }
  check_dim(mix.dim(), x_from.size(), "exact_gaussian_flow");
  const auto& comp = mix.components()[0];
  const double c2 = comp.std * comp.std;
  const auto from = sched.alpha_sigma(t_from);
  const auto to = sched.alpha_sigma(t_to);
  const double v_from = from.alpha * from.alpha * c2 + from.sigma * from.sigma;
  const double v_to = to.alpha * to.alpha * c2 + to.sigma * to.sigma;
  const double ratio = std::sqrt(v_to / v_from);
  std::vector<double> out(x_from.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = to.alpha * comp.mean[i] +
             ratio * (x_from[i] - from.alpha * comp.mean[i]);
  }
  return out;
}

Batch exact_gaussian_flow(const GaussianMixture& mix,
                          const NoiseSchedule& sched, const Batch& x_from,
                          double t_from, double t_to) {
  Batch out(x_from.rows, x_from.dim);
  for (std::size_t i = 0; i < x_from.rows; ++i) {
    const auto row = exact_gaussian_flow(mix, sched, x_from.row(i), t_from, t_to);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace deis
