// SPDX-License-Identifier: Apache-2.0
#include "deis/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deis/error.hpp"

namespace deis {
namespace {

void check_time(double t, const char* what) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                std::string(what) + ": time " + std::to_string(t) +
                    " outside [0, 1]");
  }
}

}  // namespace

NoiseSchedule::NoiseSchedule(double beta_min, double beta_max, int n,
                             std::vector<double> table)
    : beta_min_(beta_min),
      beta_max_(beta_max),
      n_(n),
      alpha_table_(std::move(table)) {}

NoiseSchedule NoiseSchedule::vp_linear(double beta_min, double beta_max,
                                       int n_discrete) {
  if (!(beta_min > 0.0 && beta_min < beta_max && beta_max < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "schedule requires 0 < beta_min < beta_max < 1");
  }
  if (n_discrete < 2) {
    throw Error(ErrorCode::kInvalidArgument, "schedule requires n_discrete >= 2");
  }
  const double n = static_cast<double>(n_discrete);
  std::vector<double> table(static_cast<std::size_t>(n_discrete) + 1);
  double alpha2 = 1.0;
  table[0] = 1.0;
  for (int i = 1; i <= n_discrete; ++i) {
    const double beta = beta_min + (beta_max - beta_min) * (i / n);
    alpha2 *= 1.0 - beta;
    table[static_cast<std::size_t>(i)] = std::sqrt(alpha2);
  }
  return NoiseSchedule(beta_min, beta_max, n_discrete, std::move(table));
}

int NoiseSchedule::segment(double t) const {
  const int k = static_cast<int>(std::floor(t * n_));
  return std::clamp(k, 0, n_ - 1);
}

double NoiseSchedule::alpha(double t) const {
  check_time(t, "alpha");
  const int k = segment(t);
  const double frac = t * n_ - k;
  const auto lo = alpha_table_[static_cast<std::size_t>(k)];
  const auto hi = alpha_table_[static_cast<std::size_t>(k) + 1];
  return (1.0 - frac) * lo + frac * hi;
}

AlphaSigma NoiseSchedule::alpha_sigma(double t) const {
  const double a = alpha(t);
  return {a, std::sqrt(std::max(0.0, 1.0 - a * a))};
}

double NoiseSchedule::alpha_slope(double t) const {
  check_time(t, "alpha_slope");
  const auto k = static_cast<std::size_t>(segment(t));
  return (alpha_table_[k + 1] - alpha_table_[k]) * n_;
}

DriftDiffusion NoiseSchedule::drift_diffusion(double t) const {
  const double a = alpha(t);
  const double da = alpha_slope(t);
  const double f = da / a;
  const double sigma2 = 1.0 - a * a;
  const double dsigma2 = -2.0 * a * da;
  return {f, dsigma2 - 2.0 * f * sigma2};
}

double NoiseSchedule::psi(double t, double u) const {
  return alpha(t) / alpha(u);
}

}  // namespace deis
