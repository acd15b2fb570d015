// SPDX-License-Identifier: Apache-2.0
#include "deis/grid.hpp"

#include "deis/error.hpp"

namespace deis {

TimeGrid make_time_grid(GridKind kind, int n_steps) {
  if (n_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "time grid needs n_steps >= 1");
  }
  TimeGrid grid;
  grid.kind = kind;
  grid.times.resize(static_cast<std::size_t>(n_steps) + 1);
  const double n = n_steps;
  for (int i = 0; i <= n_steps; ++i) {
    const double u = i / n;
    grid.times[static_cast<std::size_t>(i)] =
        kind == GridKind::kTrailingQuadratic ? u * u : u;
  }
  grid.times.front() = 0.0;
  grid.times.back() = 1.0;
  return grid;
}

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::kTrailingQuadratic: return "quadratic";
    case GridKind::kTrailingLinear: return "linear";
    case GridKind::kUniform: return "uniform";
  }
  return "unknown";
}

GridKind parse_grid_kind(const std::string& name) {
  if (name == "quadratic") return GridKind::kTrailingQuadratic;
  if (name == "linear") return GridKind::kTrailingLinear;
  if (name == "uniform") return GridKind::kUniform;
  throw Error(ErrorCode::kInvalidArgument, "unknown grid kind '" + name + "'");
}

}  // namespace deis
