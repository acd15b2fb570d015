// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "deis/batch.hpp"
#include "deis/schedule.hpp"

namespace deis {

/// Score contract consumed by the samplers. Implementations must be pure:
/// the same (x, t) gives bit-identical output, and concurrent calls are safe.
class ScoreFunction {
 public:
  virtual ~ScoreFunction() = default;
  virtual std::size_t dim() const = 0;
  virtual void evaluate(std::span<const double> x, double t,
                        std::span<double> out) const = 0;
};

struct MixtureComponent {
  double weight = 0.0;
  std::vector<double> mean;
  double std = 1.0;  // isotropic
};

/// Isotropic Gaussian mixture used as a known data distribution p(x_0).
class GaussianMixture {
 public:
  GaussianMixture(std::size_t dim, std::vector<MixtureComponent> components);

  std::size_t dim() const { return dim_; }
  std::span<const MixtureComponent> components() const { return components_; }
  bool is_single_gaussian() const { return components_.size() == 1; }

 private:
  std::size_t dim_;
  std::vector<MixtureComponent> components_;
};

/// One component of the noised marginal p(x_t).
struct MarginalComponent {
  double weight;
  std::vector<double> mean;  // a_t * mu_k
  double variance;           // a_t^2 c_k^2 + sigma_t^2
};

std::vector<MarginalComponent> gmm_marginal(const GaussianMixture& mix,
                                            const NoiseSchedule& sched,
                                            double t);

/// Exact score of p(x_t), with posterior responsibilities in log space.
void gmm_score(const GaussianMixture& mix, const NoiseSchedule& sched,
               std::span<const double> x, double t, std::span<double> out);
std::vector<double> gmm_score(const GaussianMixture& mix,
                              const NoiseSchedule& sched,
                              std::span<const double> x, double t);

/// Direct draws from p(x_0); row i uses stream (seed, i, kMixtureDraw).
Batch sample_mixture(const GaussianMixture& mix, std::size_t rows,
                     std::uint64_t seed);

enum class Parameterisation { kNoisePrediction, kSamplePrediction };

/// noise: eps = -sigma_t s.  sample: x_hat = (x + sigma_t^2 s) / a_t.
std::vector<double> convert_parameterisation(std::span<const double> score,
                                             std::span<const double> x,
                                             double t,
                                             const NoiseSchedule& sched,
                                             Parameterisation target);

/// Inverse of convert_parameterisation.
std::vector<double> score_from_parameterisation(std::span<const double> value,
                                                std::span<const double> x,
                                                double t,
                                                const NoiseSchedule& sched,
                                                Parameterisation source);

/// Closed-form probability-flow map for single-Gaussian data N(mu, c^2 I).
///
/// z = (x_t - a_t mu) / sqrt(v(t)) with v(t) = a_t^2 c^2 + sigma_t^2 is
/// constant along the flow, since v' = 2 f v + g^2.
std::vector<double> exact_gaussian_flow(const GaussianMixture& mix,
                                        const NoiseSchedule& sched,
                                        std::span<const double> x_from,
                                        double t_from, double t_to);
Batch exact_gaussian_flow(const GaussianMixture& mix,
                          const NoiseSchedule& sched, const Batch& x_from,
                          double t_from, double t_to);

/// ScoreFunction backed by the analytic mixture score.
class MixtureScore final : public ScoreFunction {
 public:
  MixtureScore(GaussianMixture mix, NoiseSchedule sched)
      : mix_(std::move(mix)), sched_(std::move(sched)) {}

  std::size_t dim() const override { return mix_.dim(); }
  void evaluate(std::span<const double> x, double t,
                std::span<double> out) const override {
    gmm_score(mix_, sched_, x, t, out);
  }

  const GaussianMixture& mixture() const { return mix_; }

 private:
  GaussianMixture mix_;
  NoiseSchedule sched_;
};

}  // namespace deis
