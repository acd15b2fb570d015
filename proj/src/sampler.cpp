// SPDX-License-Identifier: Apache-2.0
#include "deis/sampler.hpp"

#include <cmath>
#include <deque>

#include "deis/csv.hpp"
#include "deis/error.hpp"
#include "deis/parallel.hpp"

namespace deis {
namespace {

void check_input(const Batch& x1, const TimeGrid& grid, const ScoreFunction& score) {
  if (x1.dim != score.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "initial batch dimension " + std::to_string(x1.dim) +
                    " does not match score dimension " + std::to_string(score.dim()));
  }
  if (grid.steps() < 1) throw Error(ErrorCode::kInvalidArgument, "grid has no steps");
}

void check_finite(std::span<const double> x, int step, std::size_t trajectory) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite,
                  "non-finite state after step " + std::to_string(step) +
                      " (trajectory " + std::to_string(trajectory) + ")");
    }
  }
}

/// Per-trajectory update: given the state at t_i (already overwritten in
/// place) and the raw score at t_i, produce the state at t_{i-1}.
struct Stepper {
  virtual ~Stepper() = default;
  virtual void begin() {}
  virtual void step(int i, std::span<double> x, std::span<const double> s) = 0;
};

template <class MakeStepper>
SampleResult drive(const Batch& x1, const TimeGrid& grid, const ScoreFunction& score,
                   const RunOptions& options, MakeStepper make_stepper) {
  check_input(x1, grid, score);
  const int n = grid.steps();
  SampleResult result;
  result.samples = x1;
  if (options.record_trajectory) {
    result.trajectory.assign(static_cast<std::size_t>(n) + 1, Batch(x1.rows, x1.dim));
    result.trajectory[static_cast<std::size_t>(n)] = x1;
  }
  std::vector<int> nfe(x1.rows, 0);

  parallel_chunks(x1.rows, kTrajectoryChunk, options.threads,
                  [&](std::size_t begin, std::size_t end) {
    auto stepper = make_stepper();
    std::vector<double> s(x1.dim);
    for (std::size_t traj = begin; traj < end; ++traj) {
      auto x = result.samples.row(traj);
      stepper->begin();
      for (int i = n; i >= 1; --i) {
        const double t = grid.t(i);
        score.evaluate(x, t, s);
        ++nfe[traj];
        if (options.observer) options.observer(traj, i, t, s);
        stepper->step(i, x, s);
        check_finite(x, i, traj);
        if (options.record_trajectory) {
          auto dst = result.trajectory[static_cast<std::size_t>(i) - 1].row(traj);
          std::copy(x.begin(), x.end(), dst.begin());
        }
      }
    }
  });

  for (int count : nfe) {
    if (count != n) {
      throw Error(ErrorCode::kInvalidArgument, "score evaluation count mismatch");
    }
  }
  result.nfe = n;
  return result;
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kDeis: return "deis";
    case SamplerKind::kEuler: return "euler";
    case SamplerKind::kDdim: return "ddim";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  if (name == "deis") return SamplerKind::kDeis;
  if (name == "euler") return SamplerKind::kEuler;
  if (name == "ddim") return SamplerKind::kDdim;
  throw Error(ErrorCode::kInvalidArgument, "unknown sampler '" + name + "'");
}

std::string SamplerSpec::sampler_id() const {
  if (kind == SamplerKind::kDeis) return "deis-tab" + std::to_string(order);
  return deis::to_string(kind);
}

std::string SamplerSpec::to_string() const {
  return deis::to_string(kind) + ':' + std::to_string(order) + ':' +
         deis::to_string(reparam) + ':' + deis::to_string(grid);
}

SamplerSpec default_spec(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kDeis:
      return {kind, 3, ReparamKind::kSigma, GridKind::kTrailingQuadratic};
    case SamplerKind::kEuler:
      return {kind, 0, ReparamKind::kIdentity, GridKind::kTrailingLinear};
    case SamplerKind::kDdim:
      return {kind, 0, ReparamKind::kSigma, GridKind::kTrailingLinear};
  }
  return {};
}

SamplerSpec parse_sampler_spec(const std::string& text) {
  const auto fields = split_fields(text, ':');
  if (fields.empty() || fields.size() > 4) {
    throw Error(ErrorCode::kInvalidArgument, "bad sampler spec '" + text + "'");
  }
  auto spec = default_spec(parse_sampler_kind(fields[0]));
  if (fields.size() > 1) {
    spec.order = static_cast<int>(parse_int(fields[1], "sampler order"));
    if (spec.order < 0) throw Error(ErrorCode::kInvalidArgument, "sampler order must be >= 0");
  }
  if (fields.size() > 2) spec.reparam = parse_reparam_kind(fields[2]);
  if (fields.size() > 3) spec.grid = parse_grid_kind(fields[3]);
  return spec;
}

SampleResult deis_sample(const Batch& x1, const TimeGrid& grid, int order,
                         const ScoreFunction& score,
                         const Reparameterisation& rep,
                         const CoefficientTable& table,
                         const NoiseSchedule& sched,
                         const RunOptions& options) {
  if (!(table.grid() == grid) || table.order() != order ||
      table.reparam() != rep.kind()) {
    throw Error(ErrorCode::kTableMismatch,
                "coefficient table was computed for a different grid, order or "
                "reparameterisation");
  }
  const int n = grid.steps();
  std::vector<double> psi(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> k(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    psi[static_cast<std::size_t>(i)] = sched.psi(grid.t(i - 1), grid.t(i));
    k[static_cast<std::size_t>(i)] = rep.k_value(sched, grid.t(i));
  }

  struct DeisStepper final : Stepper {
    const CoefficientTable& table;
    const std::vector<double>& psi;
    const std::vector<double>& k;
    std::size_t history_len;
    // Newest first: history[j] holds -K s at t_{i+j}.
    std::deque<std::vector<double>> history;

    DeisStepper(const CoefficientTable& tb, const std::vector<double>& p,
                const std::vector<double>& kv, int order)
        : table(tb), psi(p), k(kv), history_len(static_cast<std::size_t>(order) + 1) {}

    void begin() override { history.clear(); }

    void step(int i, std::span<double> x, std::span<const double> s) override {
      const auto idx = static_cast<std::size_t>(i);
      std::vector<double> e(s.size());
      for (std::size_t d = 0; d < s.size(); ++d) e[d] = -k[idx] * s[d];
      history.push_front(std::move(e));
      if (history.size() > history_len) history.pop_back();

      const auto c = table.step(i);
      for (std::size_t d = 0; d < x.size(); ++d) {
        double acc = psi[idx] * x[d];
        for (std::size_t j = 0; j < c.size(); ++j) acc += c[j] * history[j][d];
        x[d] = acc;
      }
    }
  };

  return drive(x1, grid, score, options, [&] {
    return std::make_unique<DeisStepper>(table, psi, k, order);
  });
}

SampleResult euler_sample(const Batch& x1, const TimeGrid& grid,
                          const ScoreFunction& score, const NoiseSchedule& sched,
                          const RunOptions& options) {
  struct EulerStepper final : Stepper {
    const TimeGrid& grid;
    const NoiseSchedule& sched;
    EulerStepper(const TimeGrid& g, const NoiseSchedule& s) : grid(g), sched(s) {}

    void step(int i, std::span<double> x, std::span<const double> s) override {
      const double t = grid.t(i);
      const double dt = grid.t(i - 1) - t;
      const auto [f, g2] = sched.drift_diffusion(t);
      for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] += dt * (f * x[d] - 0.5 * g2 * s[d]);
      }
    }
  };
  return drive(x1, grid, score, options,
               [&] { return std::make_unique<EulerStepper>(grid, sched); });
}

SampleResult ddim_sample(const Batch& x1, const TimeGrid& grid,
                         const ScoreFunction& score, const NoiseSchedule& sched,
                         const RunOptions& options) {
  struct DdimStepper final : Stepper {
    const TimeGrid& grid;
    const NoiseSchedule& sched;
    DdimStepper(const TimeGrid& g, const NoiseSchedule& s) : grid(g), sched(s) {}

    void step(int i, std::span<double> x, std::span<const double> s) override {
      const auto cur = sched.alpha_sigma(grid.t(i));
      const auto prev = sched.alpha_sigma(grid.t(i - 1));
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double eps = -cur.sigma * s[d];
        x[d] = prev.alpha * (x[d] - cur.sigma * eps) / cur.alpha + prev.sigma * eps;
      }
    }
  };
  return drive(x1, grid, score, options,
               [&] { return std::make_unique<DdimStepper>(grid, sched); });
}

SampleResult run_sampler(const SamplerSpec& spec, int nfe, const Batch& x1,
                         const ScoreFunction& score, const NoiseSchedule& sched,
                         const ScoreMagnitudeProfile* profile, int subdivisions,
                         const RunOptions& options) {
  const auto grid = make_time_grid(spec.grid, nfe);
  switch (spec.kind) {
    case SamplerKind::kEuler: return euler_sample(x1, grid, score, sched, options);
    case SamplerKind::kDdim: return ddim_sample(x1, grid, score, sched, options);
    case SamplerKind::kDeis: {
      const auto rep = Reparameterisation::make(spec.reparam, profile);
      const auto table = compute_coefficients(grid, spec.order, rep, sched, subdivisions);
      return deis_sample(x1, grid, spec.order, score, rep, table, sched, options);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown sampler");
}

}  // namespace deis
