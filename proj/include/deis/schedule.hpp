// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace deis {

struct AlphaSigma {
  double alpha;
  double sigma;
};

struct DriftDiffusion {
  double f;   // (da/dt) / a
  double g2;  // dsigma^2/dt - 2 f sigma^2
};

/// Variance-preserving schedule tabulated at t_i = i/N.
///
/// a_t is the piecewise-linear interpolant of the table and sigma_t is derived
/// from it, so sigma_t^2 = 1 - a_t^2 holds at every t, not only at the knots.
/// Derivatives are those of the interpolant itself (one-sided at knots), which
/// keeps f, g^2, Psi and sigma mutually consistent.
class NoiseSchedule {
 public:
  /// Linear beta schedule: a_{i/N}^2 = prod_{k=1..i} (1 - beta_{k/N}) with
  /// beta_t = beta_min + (beta_max - beta_min) t.
  static NoiseSchedule vp_linear(double beta_min, double beta_max,
                                 int n_discrete = 1000);

  double alpha(double t) const;
  double sigma(double t) const { return alpha_sigma(t).sigma; }
  AlphaSigma alpha_sigma(double t) const;

  /// Slope of the interpolated a_t. Knots belong to the segment on their
  /// right, except t = 1.
  double alpha_slope(double t) const;

  DriftDiffusion drift_diffusion(double t) const;

  /// Linear transition Psi(t, u) = a_t / a_u.
  double psi(double t, double u) const;

  double beta_min() const { return beta_min_; }
  double beta_max() const { return beta_max_; }
  int n_discrete() const { return n_; }
  std::span<const double> alpha_table() const { return alpha_table_; }

  /// Segment index containing t, in [0, N-1].
  int segment(double t) const;

 private:
  NoiseSchedule(double beta_min, double beta_max, int n,
                std::vector<double> table);

  double beta_min_;
  double beta_max_;
  int n_;
  std::vector<double> alpha_table_;
};

inline NoiseSchedule make_vp_linear_schedule(double beta_min, double beta_max,
                                             int n_discrete) {
  return NoiseSchedule::vp_linear(beta_min, beta_max, n_discrete);
}

}  // namespace deis
