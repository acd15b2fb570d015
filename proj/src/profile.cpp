// SPDX-License-Identifier: Apache-2.0
#include "deis/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deis/coeffs.hpp"
#include "deis/csv.hpp"
#include "deis/error.hpp"
#include "deis/parallel.hpp"
#include "deis/sampler.hpp"

namespace deis {

void ScoreMagnitudeProfile::validate() const {
  if (knots.empty() || knots.size() != values.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "profile needs matching, non-empty knots and values");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i] >= 0.0 && knots[i] <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "profile knot outside [0, 1]");
    }
    if (i > 0 && !(knots[i] > knots[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "profile knots must be strictly ascending");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorCode::kInvalidArgument, "profile values must be positive and finite");
    }
  }
  if (!(truncation_threshold >= 0.0 && truncation_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "truncation threshold outside [0, 1]");
  }
}

namespace {

double interpolate(const ScoreMagnitudeProfile& p, double t) {
  if (t <= p.knots.front()) return p.values.front();
  if (t >= p.knots.back()) return p.values.back();
  const auto it = std::upper_bound(p.knots.begin(), p.knots.end(), t);
  const auto hi = static_cast<std::size_t>(it - p.knots.begin());
  const auto lo = hi - 1;
  if (p.knots[lo] == t) return p.values[lo];
  const double w = (t - p.knots[lo]) / (p.knots[hi] - p.knots[lo]);
  return (1.0 - w) * p.values[lo] + w * p.values[hi];
}

}  // namespace

double profile_lookup(const ScoreMagnitudeProfile& p, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "profile_lookup: time outside [0, 1]");
  }
  if (p.knots.empty()) throw Error(ErrorCode::kInvalidArgument, "empty profile");
  return interpolate(p, std::max(t, p.truncation_threshold));
}

ScoreMagnitudeProfile collect_profile(const ScoreFunction& score,
                                      const NoiseSchedule& sched, int nfe,
                                      int batch, std::uint64_t seed,
                                      double truncation_threshold,
                                      int subdivisions, int threads) {
  if (nfe < 2) throw Error(ErrorCode::kInvalidArgument, "profile needs nfe >= 2");
  if (batch < 1) throw Error(ErrorCode::kInvalidArgument, "profile needs batch >= 1");

  const auto grid = make_time_grid(GridKind::kUniform, nfe);
  const auto rep = Reparameterisation::sigma();
  constexpr int kOrder = 3;
  const auto table = compute_coefficients(grid, kOrder, rep, sched, subdivisions);
  const auto x1 = standard_normal_batch(static_cast<std::size_t>(batch), score.dim(), seed);

  // sums[chunk][step]: chunks are processed sequentially by one thread each,
  // so the totals do not depend on the thread count.
  const std::size_t n_chunks = (x1.rows + kTrajectoryChunk - 1) / kTrajectoryChunk;
  std::vector<std::vector<double>> sums(n_chunks,
                                        std::vector<double>(static_cast<std::size_t>(nfe) + 1, 0.0));
  RunOptions options;
  options.threads = threads;
  options.observer = [&](std::size_t traj, int step, double, std::span<const double> s) {
    double acc = 0.0;
    for (double v : s) acc += std::abs(v);
    sums[traj / kTrajectoryChunk][static_cast<std::size_t>(step)] += acc;
  };
  deis_sample(x1, grid, kOrder, score, rep, table, sched, options);

  ScoreMagnitudeProfile p;
  p.truncation_threshold = truncation_threshold;
  p.batch_size = batch;
  p.nfe_used = nfe;
  p.seed = seed;
  const double count = static_cast<double>(x1.rows * x1.dim);
  for (int i = 1; i <= nfe; ++i) {
    double total = 0.0;
    for (const auto& chunk : sums) total += chunk[static_cast<std::size_t>(i)];
    p.knots.push_back(grid.t(i));
    p.values.push_back(total / count);
  }
  p.validate();
  return p;
}

std::string format_profile_csv(const ScoreMagnitudeProfile& p,
                               const std::vector<std::string>& preamble) {
  std::string out;
  append_preamble(out, preamble);
  out += "t,s_bar\n";
  for (std::size_t i = 0; i < p.knots.size(); ++i) {
    out += format_double(p.knots[i]) + ',' + format_double(p.values[i]) + '\n';
  }
  return out;
}

ScoreMagnitudeProfile parse_profile_csv(const std::string& text,
                                        double truncation_threshold) {
  ScoreMagnitudeProfile p;
  p.truncation_threshold = truncation_threshold;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      // Optional provenance: "# key=value key=value ...".
      std::istringstream tokens{std::string(body.substr(1))};
      std::string tok;
      while (tokens >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto value = tok.substr(eq + 1);
        if (key == "batch") p.batch_size = static_cast<int>(parse_int(value, "profile batch"));
        if (key == "nfe") p.nfe_used = static_cast<int>(parse_int(value, "profile nfe"));
        if (key == "seed") p.seed = static_cast<std::uint64_t>(parse_int(value, "profile seed"));
      }
      continue;
    }
    if (!header_seen) {
      if (body != "t,s_bar") {
        throw Error(ErrorCode::kInvalidArgument, "profile csv: expected header 't,s_bar'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(body);
    const auto where = "profile csv line " + std::to_string(line_no);
    if (fields.size() != 2) throw Error(ErrorCode::kInvalidArgument, where + ": expected 2 columns");
    p.knots.push_back(parse_double(fields[0], where));
    p.values.push_back(parse_double(fields[1], where));
  }
  if (!header_seen) throw Error(ErrorCode::kInvalidArgument, "profile csv: missing header");
  p.validate();
  return p;
}

ScoreMagnitudeProfile read_profile_csv(const std::filesystem::path& path,
                                       double truncation_threshold) {
  return parse_profile_csv(read_text_file(path), truncation_threshold);
}

}  // namespace deis
