// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "deis/oracle.hpp"
#include "deis/schedule.hpp"

namespace deis::test {

inline NoiseSchedule standard_schedule() { return NoiseSchedule::vp_linear(1e-4, 2e-2, 1000); }

// a_1 from the raw product, accumulated in long double.
inline double product_alpha_one() {
  long double prod = 1.0L;
  for (int k = 1; k <= 1000; ++k) {
    const long double beta = 1e-4L + (2e-2L - 1e-4L) * k / 1000.0L;
    prod *= 1.0L - beta;
  }
  return static_cast<double>(std::sqrt(prod));
}

inline GaussianMixture single_gaussian(std::size_t dim, double c, double mu = 0.0) {
  return GaussianMixture(dim, {{1.0, std::vector<double>(dim, mu), c}});
}

// Three collinear components, used for the curve and comparison oracles.
inline GaussianMixture three_component_mixture() {
  return GaussianMixture(2, {{0.1, {-4.0, 0.0}, 0.002},
                             {0.8, {0.0, 0.0}, 0.002},
                             {0.1, {4.0, 0.0}, 0.002}});
}

// Log density of the marginal at time t, written out directly from the
// component formula so it shares no code with the score.
inline double mixture_log_density(const GaussianMixture& mix, const NoiseSchedule& sched,
                                  const std::vector<double>& x, double t) {
  const double a = sched.alpha(t);
  const double s2 = 1.0 - a * a;
  long double total = 0.0L;
  for (const auto& comp : mix.components()) {
    const double v = a * a * comp.std * comp.std + s2;
    long double q = 0.0L;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const long double r = x[d] - a * comp.mean[d];
      q += r * r;
    }
    total += comp.weight * std::exp(-0.5L * q / v) /
             std::pow(2.0L * 3.14159265358979323846L * v, 0.5L * x.size());
  }
  return static_cast<double>(std::log(total));
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace deis::test
