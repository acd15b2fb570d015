// SPDX-License-Identifier: Apache-2.0
#include "deis/coeffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "deis/csv.hpp"
#include "deis/error.hpp"

namespace deis {
namespace {

constexpr std::array<double, 4> kGaussNodes = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
    0.8611363115940526};
constexpr std::array<double, 4> kGaussWeights = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
    0.3478548451374538};

}  // namespace

std::string to_string(ReparamKind kind) {
  switch (kind) {
    case ReparamKind::kIdentity: return "identity";
    case ReparamKind::kSigma: return "sigma";
    case ReparamKind::kScoreNorm: return "score-norm";
  }
  return "unknown";
}

ReparamKind parse_reparam_kind(const std::string& name) {
  if (name == "identity") return ReparamKind::kIdentity;
  if (name == "sigma") return ReparamKind::kSigma;
  if (name == "score-norm") return ReparamKind::kScoreNorm;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown reparameterisation '" + name + "'");
}

Reparameterisation Reparameterisation::score_norm(ScoreMagnitudeProfile profile) {
  profile.validate();
  return Reparameterisation(
      ReparamKind::kScoreNorm,
      std::make_shared<const ScoreMagnitudeProfile>(std::move(profile)));
}

Reparameterisation Reparameterisation::make(ReparamKind kind,
                                            const ScoreMagnitudeProfile* profile) {
  switch (kind) {
    case ReparamKind::kIdentity: return identity();
    case ReparamKind::kSigma: return sigma();
    case ReparamKind::kScoreNorm:
      if (profile == nullptr) {
        throw Error(ErrorCode::kMissingProfile,
                    "score-norm reparameterisation needs a profile");
      }
      return score_norm(*profile);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown reparameterisation");
}

double Reparameterisation::k_value(const NoiseSchedule& sched, double t) const {
  switch (kind_) {
    case ReparamKind::kIdentity: return 1.0;
    case ReparamKind::kSigma: return sched.sigma(t);
    case ReparamKind::kScoreNorm:
      if (!profile_) {
        throw Error(ErrorCode::kMissingProfile,
                    "score-norm reparameterisation needs a profile");
      }
      return 1.0 / profile_lookup(*profile_, t);
  }
  return 1.0;
}

double lagrange_weight(std::size_t j, double tau, std::span<const double> nodes) {
  if (j >= nodes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "lagrange_weight: index out of range");
  }
  double w = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == j) continue;
    const double denom = nodes[j] - nodes[k];
    if (denom == 0.0) {
      throw Error(ErrorCode::kDuplicateNodes, "lagrange_weight: duplicate nodes");
    }
    w *= (tau - nodes[k]) / denom;
  }
  return w;
}

std::vector<QuadratureNode> step_quadrature(double lo, double hi,
                                            const NoiseSchedule& sched,
                                            int subdivisions) {
  if (subdivisions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "quadrature needs subdivisions >= 1");
  }
  std::vector<QuadratureNode> out;
  if (!(hi > lo)) return out;

  const bool sqrt_map = lo == 0.0;
  auto to_var = [&](double tau) { return sqrt_map ? std::sqrt(tau) : tau; };
  const double v_lo = to_var(lo);
  const double v_hi = to_var(hi);

  std::vector<double> cuts;
  cuts.reserve(static_cast<std::size_t>(subdivisions) + 8);
  for (int s = 0; s <= subdivisions; ++s) {
    cuts.push_back(v_lo + (v_hi - v_lo) * s / subdivisions);
  }
  cuts.back() = v_hi;
  const int n = sched.n_discrete();
  for (int k = static_cast<int>(std::floor(lo * n)) + 1; k < n; ++k) {
    const double knot = static_cast<double>(k) / n;
    if (knot >= hi) break;
    if (knot > lo) cuts.push_back(to_var(knot));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  out.reserve((cuts.size() - 1) * kGaussNodes.size());
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
    const double half = 0.5 * (cuts[c + 1] - cuts[c]);
    for (std::size_t g = 0; g < kGaussNodes.size(); ++g) {
      const double v = mid + half * kGaussNodes[g];
      const double w = half * kGaussWeights[g];
      if (sqrt_map) {
        out.push_back({v * v, 2.0 * v * w});
      } else {
        out.push_back({v, w});
      }
    }
  }
  return out;
}

std::vector<double> step_coefficients(double lo, double hi,
                                      std::span<const double> nodes,
                                      const Reparameterisation& rep,
                                      const NoiseSchedule& sched,
                                      int subdivisions) {
  if (nodes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "step_coefficients: no nodes");
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t k = j + 1; k < nodes.size(); ++k) {
      if (nodes[j] == nodes[k]) {
        throw Error(ErrorCode::kDuplicateNodes, "step_coefficients: duplicate nodes");
      }
    }
  }
  std::vector<double> c(nodes.size(), 0.0);
  const double a_lo = sched.alpha(lo);
  for (const auto& q : step_quadrature(lo, hi, sched, subdivisions)) {
    const double k = rep.k_value(sched, q.tau);
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(ErrorCode::kSingularReparameterisation,
                  "K(t) is not positive and finite at t = " + format_double(q.tau));
    }
    const double a = sched.alpha(q.tau);
    const double g2 = sched.drift_diffusion(q.tau).g2;
    // Integration runs from hi down to lo.
    const double base = -q.weight * 0.5 * (a_lo / a) * g2 / k;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      c[j] += base * lagrange_weight(j, q.tau, nodes);
    }
  }
  return c;
}

CoefficientTable::CoefficientTable(TimeGrid grid, int order, ReparamKind reparam,
                                   int subdivisions,
                                   std::vector<std::vector<double>> rows)
    : grid_(std::move(grid)),
      order_(order),
      reparam_(reparam),
      subdivisions_(subdivisions),
      rows_(std::move(rows)) {}

std::span<const double> CoefficientTable::step(int i) const {
  if (i < 1 || i > grid_.steps()) {
    throw Error(ErrorCode::kTableMismatch, "coefficient table has no step " +
                                               std::to_string(i));
  }
  return rows_[static_cast<std::size_t>(i)];
}

CoefficientTable compute_coefficients(const TimeGrid& grid, int order,
                                      const Reparameterisation& rep,
                                      const NoiseSchedule& sched,
                                      int subdivisions) {
  if (order < 0) throw Error(ErrorCode::kInvalidArgument, "order must be >= 0");
  if (subdivisions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "subdivisions must be >= 1");
  }
  const int n = grid.steps();
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "grid has no steps");
  for (int i = 1; i <= n; ++i) {
    if (!(grid.t(i) > grid.t(i - 1))) {
      throw Error(ErrorCode::kInvalidArgument, "grid times must be strictly monotone");
    }
  }
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) {
    const int r = std::min(order, n - i);
    std::span<const double> nodes(grid.times.data() + i,
                                  static_cast<std::size_t>(r) + 1);
    rows[static_cast<std::size_t>(i)] =
        step_coefficients(grid.t(i - 1), grid.t(i), nodes, rep, sched, subdivisions);
  }
  return CoefficientTable(grid, order, rep.kind(), subdivisions, std::move(rows));
}

std::vector<double> reparam_evaluation_times(const TimeGrid& grid,
                                             const NoiseSchedule& sched,
                                             int subdivisions) {
  std::vector<double> out;
  for (int i = 1; i <= grid.steps(); ++i) {
    out.push_back(grid.t(i));
    for (const auto& q : step_quadrature(grid.t(i - 1), grid.t(i), sched, subdivisions)) {
      out.push_back(q.tau);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_coefficients_csv(const CoefficientTable& table,
                                    const std::vector<std::string>& preamble) {
  std::string out;
  append_preamble(out, preamble);
  out += "i,t_i,t_prev,j,C_ij\n";
  const auto& grid = table.grid();
  for (int i = grid.steps(); i >= 1; --i) {
    const auto row = table.step(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      out += std::to_string(i) + ',' + format_double(grid.t(i)) + ',' +
             format_double(grid.t(i - 1)) + ',' + std::to_string(j) + ',' +
             format_double(row[j]) + '\n';
    }
  }
  return out;
}

}  // namespace deis

namespace deis {

ScoreMagnitudeProfile make_sigma_proportional_profile(
    const NoiseSchedule& sched, std::span<const TimeGrid> grids, int subdivisions,
    double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  std::vector<double> times;
  for (const auto& grid : grids) {
    const auto t = reparam_evaluation_times(grid, sched, subdivisions);
    times.insert(times.end(), t.begin(), t.end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  ScoreMagnitudeProfile p;
  p.truncation_threshold = 0.0;
  for (double t : times) {
    const double sigma = sched.sigma(t);
    if (!(sigma > 0.0)) continue;
    p.knots.push_back(t);
    p.values.push_back(1.0 / (scale * sigma));
  }
  p.validate();
  return p;
}

}  // namespace deis
