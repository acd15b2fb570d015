// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deis/metrics.hpp"
#include "deis/oracle.hpp"
#include "deis/profile.hpp"
#include "deis/sampler.hpp"
#include "deis/schedule.hpp"

namespace deis {

enum class ProfileSource { kCollect, kSigmaControl };

/// Parsed experiment file. See README for the sections and keys.
struct ExperimentConfig {
  double beta_min = 1e-4;
  double beta_max = 2e-2;
  int n_discrete = 1000;

  std::size_t dim = 0;
  std::vector<MixtureComponent> components;

  std::vector<SamplerSpec> samplers;
  std::vector<int> nfe;
  int batch = 256;
  std::uint64_t seed = 0;
  MetricKind metric = MetricKind::kAuto;
  int projections = 64;
  int reference_nfe = 0;
  int subdivisions = kDefaultSubdivisions;
  int threads = 1;

  ProfileSource profile_source = ProfileSource::kCollect;
  int profile_nfe = 1000;
  int profile_batch = 256;
  std::uint64_t profile_seed = 1;
  double truncation = 0.005;
  double control_scale = 1.0;

  std::filesystem::path output_dir = ".";
  std::string hash;  // FNV-1a of the config text, 16 hex digits

  NoiseSchedule schedule() const;
  GaussianMixture mixture() const;
};

/// Throws kConfig naming the offending `section.key`.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& text);

/// Overrides for `sample`; unset fields come from the config.
struct SampleRequest {
  SamplerSpec spec;
  std::optional<int> nfe;
  std::optional<int> batch;
  std::optional<std::uint64_t> seed;
};

/// Loads the profile from `path` when given, otherwise builds it as the
/// config's [profile] section says. A sigma-control profile covers the
/// score-norm samplers of the sweep plus `extra_grids`.
ScoreMagnitudeProfile obtain_profile(const ExperimentConfig& cfg,
                                     const std::optional<std::filesystem::path>& path,
                                     std::span<const TimeGrid> extra_grids = {});

ScoreMagnitudeProfile run_profile(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out);
CoefficientTable run_coeffs(const ExperimentConfig& cfg, const SamplerSpec& spec,
                            int nfe,
                            const std::optional<std::filesystem::path>& profile,
                            const std::filesystem::path& out);
Batch run_sample(const ExperimentConfig& cfg, const SampleRequest& request,
                 const std::optional<std::filesystem::path>& profile,
                 const std::filesystem::path& out);
/// Writes report.csv and report.json into `out_dir`.
std::vector<ConvergenceReport> run_converge(
    const ExperimentConfig& cfg,
    const std::optional<std::filesystem::path>& profile,
    const std::filesystem::path& out_dir);
std::vector<CurveRow> run_curves(const ExperimentConfig& cfg,
                                 const std::optional<std::filesystem::path>& profile,
                                 const std::filesystem::path& out);

std::string format_report_csv(const std::vector<ConvergenceReport>& reports,
                              const std::vector<std::string>& preamble);
std::string format_report_json(const std::vector<ConvergenceReport>& reports,
                               const std::string& config_hash, std::uint64_t seed);
std::string format_curves_csv(const std::vector<CurveRow>& rows,
                              const std::vector<std::string>& preamble);
std::string format_samples_csv(const Batch& samples,
                               const std::vector<std::string>& preamble);

}  // namespace deis
