// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace deis {

enum class GridKind { kTrailingQuadratic, kTrailingLinear, kUniform };

/// Sampling times t_0 = 0 < t_1 < ... < t_N = 1, stored so that
/// `times[i]` is t_i. Samplers walk it from i = N down to i = 0.
struct TimeGrid {
  GridKind kind = GridKind::kTrailingLinear;
  std::vector<double> times;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  double t(int i) const { return times[static_cast<std::size_t>(i)]; }

  bool operator==(const TimeGrid&) const = default;
};

/// quadratic: t_i = (i/N)^2.  linear and uniform: t_i = i/N.
TimeGrid make_time_grid(GridKind kind, int n_steps);

std::string to_string(GridKind kind);
GridKind parse_grid_kind(const std::string& name);

}  // namespace deis
