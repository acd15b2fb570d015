// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deis/grid.hpp"
#include "deis/profile.hpp"
#include "deis/schedule.hpp"

namespace deis {

enum class ReparamKind { kIdentity, kSigma, kScoreNorm };

std::string to_string(ReparamKind kind);
ReparamKind parse_reparam_kind(const std::string& name);

/// Positive factor K_t applied to the score before extrapolation.
class Reparameterisation {
 public:
  static Reparameterisation identity() { return Reparameterisation(ReparamKind::kIdentity, nullptr); }
  static Reparameterisation sigma() { return Reparameterisation(ReparamKind::kSigma, nullptr); }
  static Reparameterisation score_norm(ScoreMagnitudeProfile profile);
  static Reparameterisation make(ReparamKind kind,
                                 const ScoreMagnitudeProfile* profile);

  ReparamKind kind() const { return kind_; }
  const ScoreMagnitudeProfile* profile() const { return profile_.get(); }

  double k_value(const NoiseSchedule& sched, double t) const;

 private:
  Reparameterisation(ReparamKind kind,
                     std::shared_ptr<const ScoreMagnitudeProfile> profile)
      : kind_(kind), profile_(std::move(profile)) {}

  ReparamKind kind_;
  std::shared_ptr<const ScoreMagnitudeProfile> profile_;
};

inline double k_value(const Reparameterisation& rep, const NoiseSchedule& sched,
                      double t) {
  return rep.k_value(sched, t);
}

/// j-th Lagrange basis polynomial over `nodes`, evaluated at tau.
double lagrange_weight(std::size_t j, double tau, std::span<const double> nodes);

struct QuadratureNode {
  double tau;
  double weight;  // includes any change-of-variables Jacobian
};

/// Composite 4-point Gauss-Legendre rule for [lo, hi]: `subdivisions` equal
/// pieces, each further split at the schedule's table knots. An interval
/// starting at t = 0 is integrated in u = sqrt(tau), which removes the
/// 1/sigma endpoint singularity of K = sigma.
std::vector<QuadratureNode> step_quadrature(double lo, double hi,
                                            const NoiseSchedule& sched,
                                            int subdivisions);

/// C_j = int_{hi}^{lo} 1/2 Psi(lo, tau) g^2 / K(tau) l_j(tau) dtau, with l_j
/// the Lagrange basis over `nodes` (nodes[0] = hi, then older times).
std::vector<double> step_coefficients(double lo, double hi,
                                      std::span<const double> nodes,
                                      const Reparameterisation& rep,
                                      const NoiseSchedule& sched,
                                      int subdivisions);

/// Exponential-integrator coefficients for every step of a grid.
///
/// Step i (t_i -> t_{i-1}, i = 1..N) uses nodes t_i, ..., t_{i+r'} with
/// r' = min(r, N - i), so steps near t = 1 run at the largest order their
/// history allows.
class CoefficientTable {
 public:
  CoefficientTable(TimeGrid grid, int order, ReparamKind reparam,
                   int subdivisions, std::vector<std::vector<double>> rows);

  const TimeGrid& grid() const { return grid_; }
  int order() const { return order_; }
  ReparamKind reparam() const { return reparam_; }
  int subdivisions() const { return subdivisions_; }

  /// Coefficients C_{i,0..r'} for step i in [1, N].
  std::span<const double> step(int i) const;
  int step_order(int i) const { return static_cast<int>(step(i).size()) - 1; }

 private:
  TimeGrid grid_;
  int order_;
  ReparamKind reparam_;
  int subdivisions_;
  std::vector<std::vector<double>> rows_;
};

inline constexpr int kDefaultSubdivisions = 32;

CoefficientTable compute_coefficients(const TimeGrid& grid, int order,
                                      const Reparameterisation& rep,
                                      const NoiseSchedule& sched,
                                      int subdivisions = kDefaultSubdivisions);

/// Every time at which coefficient computation or sampling on `grid`
/// evaluates K: all quadrature abscissae plus the grid nodes t_1..t_N.
std::vector<double> reparam_evaluation_times(const TimeGrid& grid,
                                             const NoiseSchedule& sched,
                                             int subdivisions = kDefaultSubdivisions);

/// CSV with columns i,t_i,t_prev,j,C_ij.
std::string format_coefficients_csv(const CoefficientTable& table,
                                    const std::vector<std::string>& preamble);

}  // namespace deis

namespace deis {

/// Control profile with s_bar(t) = 1 / (scale * sigma_t) stored at every time
/// where sampling on `grids` evaluates K, so score-norm runs on those grids
/// use K_t = scale * sigma_t exactly. The truncation threshold is 0.
ScoreMagnitudeProfile make_sigma_proportional_profile(
    const NoiseSchedule& sched, std::span<const TimeGrid> grids,
    int subdivisions = kDefaultSubdivisions, double scale = 1.0);

}  // namespace deis
