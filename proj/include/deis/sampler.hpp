// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deis/batch.hpp"
#include "deis/coeffs.hpp"
#include "deis/grid.hpp"
#include "deis/oracle.hpp"
#include "deis/profile.hpp"
#include "deis/schedule.hpp"

namespace deis {

enum class SamplerKind { kDeis, kEuler, kDdim };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& name);

/// Sampler selection as used by configs and the CLI.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::kDeis;
  int order = 3;
  ReparamKind reparam = ReparamKind::kSigma;
  GridKind grid = GridKind::kTrailingQuadratic;

  /// "deis-tab3", "euler", "ddim".
  std::string sampler_id() const;
  /// "kind:order:reparam:grid"
  std::string to_string() const;
};

/// Parses "kind[:order[:reparam[:grid]]]". Missing fields take the defaults
/// of `default_spec(kind)`.
SamplerSpec parse_sampler_spec(const std::string& text);
SamplerSpec default_spec(SamplerKind kind);

/// Called once per score evaluation with the raw score. Calls for one
/// trajectory come from one thread, in step order.
using ScoreObserver = std::function<void(std::size_t trajectory, int step,
                                         double t, std::span<const double> score)>;

struct RunOptions {
  int threads = 1;
  bool record_trajectory = false;
  ScoreObserver observer;
};

struct SampleResult {
  Batch samples;
  int nfe = 0;  // score evaluations per trajectory
  /// trajectory[i] holds the batch at t_i when recording was requested.
  std::vector<Batch> trajectory;
};

/// Exponential-integrator multistep sampler of order `order`, extrapolating
/// the reparameterised score -K_t s(x_t, t) with the precomputed table.
SampleResult deis_sample(const Batch& x1, const TimeGrid& grid, int order,
                         const ScoreFunction& score,
                         const Reparameterisation& rep,
                         const CoefficientTable& table,
                         const NoiseSchedule& sched,
                         const RunOptions& options = {});

/// Explicit Euler on the probability-flow ODE.
SampleResult euler_sample(const Batch& x1, const TimeGrid& grid,
                          const ScoreFunction& score, const NoiseSchedule& sched,
                          const RunOptions& options = {});

/// Deterministic DDIM with eps_hat = -sigma_t s.
SampleResult ddim_sample(const Batch& x1, const TimeGrid& grid,
                         const ScoreFunction& score, const NoiseSchedule& sched,
                         const RunOptions& options = {});

/// Builds the grid (and coefficient table for DEIS) and dispatches.
SampleResult run_sampler(const SamplerSpec& spec, int nfe, const Batch& x1,
                         const ScoreFunction& score, const NoiseSchedule& sched,
                         const ScoreMagnitudeProfile* profile,
                         int subdivisions = kDefaultSubdivisions,
                         const RunOptions& options = {});

}  // namespace deis
