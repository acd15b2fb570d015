// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "deis/oracle.hpp"
#include "deis/schedule.hpp"

namespace deis {

/// Empirical mean absolute per-coordinate score s_bar(t), the normaliser of
/// the score-norm reparameterisation K_t = 1 / s_bar(t).
struct ScoreMagnitudeProfile {
  std::vector<double> knots;   // ascending times
  std::vector<double> values;  // positive
  double truncation_threshold = 0.005;
  int batch_size = 0;
  int nfe_used = 0;
  std::uint64_t seed = 0;

  /// Throws kInvalidArgument when the invariants do not hold.
  void validate() const;
};

/// Piecewise-linear lookup, held constant below the truncation threshold and
/// clamped outside the knot range.
double profile_lookup(const ScoreMagnitudeProfile& p, double t);

/// Runs third-order DEIS with K_t = sigma_t on a uniform `nfe`-step grid over
/// `batch` N(0, I) trajectories and records mean |s| at every evaluation.
ScoreMagnitudeProfile collect_profile(const ScoreFunction& score,
                                      const NoiseSchedule& sched, int nfe,
                                      int batch, std::uint64_t seed,
                                      double truncation_threshold = 0.005,
                                      int subdivisions = 32, int threads = 1);

/// CSV with header `t,s_bar`; `preamble` lines are written first as
/// `# ...` comments.
std::string format_profile_csv(const ScoreMagnitudeProfile& p,
                               const std::vector<std::string>& preamble);
ScoreMagnitudeProfile read_profile_csv(const std::filesystem::path& path,
                                       double truncation_threshold);
ScoreMagnitudeProfile parse_profile_csv(const std::string& text,
                                        double truncation_threshold);

}  // namespace deis
