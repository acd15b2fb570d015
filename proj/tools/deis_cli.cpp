// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Everything goes through the C API in deis/deis.h.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "deis/deis.h"

namespace {

struct SamplerFlags {
  std::string sampler = "deis";
  std::optional<int> order;
  std::optional<std::string> reparam;
  std::optional<std::string> grid;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sampler", sampler, "deis | euler | ddim")
        ->check(CLI::IsMember({"deis", "euler", "ddim"}));
    cmd->add_option("--order", order, "DEIS polynomial order r")->check(CLI::NonNegativeNumber);
    cmd->add_option("--reparam", reparam, "identity | sigma | score-norm")
        ->check(CLI::IsMember({"identity", "sigma", "score-norm"}));
    cmd->add_option("--grid", grid, "quadratic | linear | uniform")
        ->check(CLI::IsMember({"quadratic", "linear", "uniform"}));
  }

  deis_sampler_spec spec() const {
    static const std::map<std::string, deis_sampler_kind> kinds = {
        {"deis", DEIS_SAMPLER_DEIS}, {"euler", DEIS_SAMPLER_EULER}, {"ddim", DEIS_SAMPLER_DDIM}};
    static const std::map<std::string, deis_reparam_kind> reparams = {
        {"identity", DEIS_REPARAM_IDENTITY},
        {"sigma", DEIS_REPARAM_SIGMA},
        {"score-norm", DEIS_REPARAM_SCORE_NORM}};
    static const std::map<std::string, deis_grid_kind> grids = {
        {"quadratic", DEIS_GRID_QUADRATIC},
        {"linear", DEIS_GRID_LINEAR},
        {"uniform", DEIS_GRID_UNIFORM}};
    auto s = deis_default_sampler_spec(kinds.at(sampler));
    if (order) s.order = *order;
    if (reparam) s.reparam = reparams.at(*reparam);
    if (grid) s.grid = grids.at(*grid);
    return s;
  }
};

const char* c_str_or_null(const std::optional<std::string>& s) {
  return s ? s->c_str() : nullptr;
}

int report(deis_status status, const std::string& command) {
  if (status != DEIS_OK) {
    std::cerr << "deis " << command << ": " << deis_status_name(status) << ": "
              << deis_last_error() << "\n";
  }
  return deis_exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DEIS probability-flow samplers with score normalisation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> profile_path;
  std::optional<std::string> out;
  std::optional<std::string> out_dir;
  SamplerFlags flags;
  int nfe = 0;
  int batch = 0;
  std::optional<std::uint64_t> seed;

  auto* profile = app.add_subcommand("profile", "collect the score-magnitude profile (t,s_bar CSV)");
  auto* coeffs = app.add_subcommand("coeffs", "dump DEIS coefficients (i,t_i,t_prev,j,C_ij CSV)");
  auto* sample = app.add_subcommand("sample", "draw terminal samples, one CSV row per trajectory");
  auto* converge = app.add_subcommand("converge", "error-versus-NFE sweep (report.csv, report.json)");
  auto* curves = app.add_subcommand("curves", "s_bar, sigma and their product over t");

  for (auto* cmd : {profile, coeffs, sample, converge, curves}) {
    cmd->add_option("--config", config_path, "experiment config file")->required();
  }
  for (auto* cmd : {coeffs, sample, converge, curves}) {
    cmd->add_option("--profile", profile_path, "profile CSV (default: build from config)");
  }
  for (auto* cmd : {profile, coeffs, sample, curves}) {
    cmd->add_option("--out", out, "output file");
  }
  converge->add_option("--out-dir", out_dir, "output directory");
  for (auto* cmd : {coeffs, sample}) {
    flags.attach(cmd);
    cmd->add_option("--nfe", nfe, "number of steps")->check(CLI::PositiveNumber);
  }
  sample->add_option("--batch", batch, "number of trajectories")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "evaluation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  deis_config* cfg = nullptr;
  if (const auto st = deis_config_load(config_path.c_str(), &cfg); st != DEIS_OK) {
    return report(st, "config");
  }
  const std::filesystem::path dir = deis_config_output_dir(cfg);
  auto default_out = [&](const char* name) {
    if (out) return *out;
    std::filesystem::create_directories(dir);
    return (dir / name).string();
  };

  deis_status st = DEIS_OK;
  std::string name;
  if (*profile) {
    name = "profile";
    st = deis_run_profile(cfg, default_out("profile.csv").c_str());
  } else if (*coeffs) {
    name = "coeffs";
    const auto spec = flags.spec();
    st = deis_run_coeffs(cfg, &spec, nfe > 0 ? nfe : 10, c_str_or_null(profile_path),
                         default_out("coeffs.csv").c_str());
  } else if (*sample) {
    name = "sample";
    const auto spec = flags.spec();
    st = deis_run_sample(cfg, &spec, nfe, batch, seed.has_value(), seed.value_or(0),
                         c_str_or_null(profile_path), default_out("samples.csv").c_str());
  } else if (*converge) {
    name = "converge";
    const auto target = out_dir.value_or(dir.string());
    st = deis_run_converge(cfg, c_str_or_null(profile_path), target.c_str());
  } else if (*curves) {
    name = "curves";
    st = deis_run_curves(cfg, c_str_or_null(profile_path), default_out("curves.csv").c_str());
  }
  deis_config_destroy(cfg);
  return report(st, name);
}
