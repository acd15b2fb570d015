// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "deis/batch.hpp"
#include "deis/coeffs.hpp"
#include "deis/csv.hpp"
#include "deis/experiment.hpp"
#include "deis/grid.hpp"
#include "deis/metrics.hpp"
#include "deis/profile.hpp"
#include "deis/sampler.hpp"
#include "support.hpp"

using namespace deis;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, double limit_seconds,
               const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(secs < limit_seconds, fmt("%.2f s", secs) + fmt(" < %.0f s", limit_seconds));
  std::printf("[%s] %s: %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str());
  std::fflush(stdout);
  failures += out.pass ? 0 : 1;
}

std::string csv_body(const fs::path& p) {
  std::istringstream in(read_text_file(p));
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind('#', 0) != 0) out += line + "\n";
  }
  return out;
}

const char* kMixtureConfig = R"([oracle]
dim = 2
weights = 0.1, 0.8, 0.1
stds = 0.002, 0.002, 0.002
mean_0 = -4, 0
mean_1 = 0, 0
mean_2 = 4, 0
)";

void schedule_identities(Outcome& out) {
  const auto sched = test::standard_schedule();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_g = 0.0, worst_psi = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = u(rng), s = u(rng), r = u(rng);
    const auto dd = sched.drift_diffusion(t);
    worst_g = std::max(worst_g, std::abs(dd.g2 + 2.0 * dd.f) / std::abs(dd.g2));
    worst_psi = std::max(worst_psi, std::abs(sched.psi(t, s) * sched.psi(s, r) - sched.psi(t, r)));
  }
  out.require(worst_g <= 1e-6, fmt("max |g2+2f|/|g2| = %.1e <= 1e-6", worst_g));
  out.require(worst_psi <= 1e-12, fmt("max semigroup error = %.1e <= 1e-12", worst_psi));
  const double a1 = test::product_alpha_one();
  out.require(std::abs(sched.alpha(1.0) - a1) <= 1e-15, fmt("a_1 = %.9f", sched.alpha(1.0)));
}

void score_oracle(Outcome& out) {
  const auto sched = test::standard_schedule();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> weight(0.3, 1.0), ut(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t dim : {1u, 2u, 8u}) {
    std::vector<MixtureComponent> comps;
    for (int k = 0; k < 3; ++k) comps.push_back({1.0 / 3.0, test::random_vector(rng, dim, 2.0), weight(rng)});
    comps[2].weight = 1.0 - 2.0 / 3.0;
    const GaussianMixture mix(dim, comps);
    for (int n = 0; n < 100; ++n) {
      const double t = ut(rng);
      auto x = test::random_vector(rng, dim, 2.0);
      const auto score = gmm_score(mix, sched, x, t);
      double num = 0.0, den = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double keep = x[d], h = 1e-5;
        x[d] = keep + h;
        const double up = test::mixture_log_density(mix, sched, x, t);
        x[d] = keep - h;
        const double down = test::mixture_log_density(mix, sched, x, t);
        x[d] = keep;
        const double fd = (up - down) / (2.0 * h);
        num += (score[d] - fd) * (score[d] - fd);
        den += score[d] * score[d];
      }
      worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-3));
    }
  }
  out.require(worst <= 1e-4, fmt("max relative error = %.1e <= 1e-4 over 300 points", worst));
}

void closed_form_coefficients(Outcome& out) {
  const auto sched = test::standard_schedule();
  for (int n : {10, 20}) {
    const auto grid = make_time_grid(GridKind::kTrailingQuadratic, n);
    const auto table = compute_coefficients(grid, 0, Reparameterisation::sigma(), sched);
    double worst = 0.0;
    for (int i = 1; i <= n; ++i) {
      const double closed =
          sched.sigma(grid.t(i - 1)) - sched.psi(grid.t(i - 1), grid.t(i)) * sched.sigma(grid.t(i));
      worst = std::max(worst, std::abs(table.step(i)[0] - closed));
    }
    out.require(worst <= 1e-8, std::to_string(n) + fmt(" steps: %.1e <= 1e-8", worst));
  }
}

void ddim_equivalence(Outcome& out) {
  const auto sched = test::standard_schedule();
  const MixtureScore score(test::three_component_mixture(), sched);
  const auto x1 = standard_normal_batch(64, 2, 3);
  for (int nfe : {5, 10, 50}) {
    double worst = 0.0;
    for (auto kind : {GridKind::kTrailingLinear, GridKind::kTrailingQuadratic}) {
      const auto grid = make_time_grid(kind, nfe);
      const auto rep = Reparameterisation::sigma();
      const auto table = compute_coefficients(grid, 0, rep, sched);
      const auto a = deis_sample(x1, grid, 0, score, rep, table, sched);
      const auto b = ddim_sample(x1, grid, score, sched);
      worst = std::max(worst, test::max_abs_diff(a.samples.data, b.samples.data));
    }
    out.require(worst <= 1e-10, "NFE " + std::to_string(nfe) + fmt(": %.1e <= 1e-10", worst));
  }
}

void exact_flow_convergence(Outcome& out) {
  const auto sched = test::standard_schedule();
  const auto mix = test::single_gaussian(8, 0.5);
  const MixtureScore score(mix, sched);
  const auto x1 = standard_normal_batch(256, 8, 0);
  const auto exact = exact_gaussian_flow(mix, sched, x1, 1.0, 0.0);
  const std::vector<int> nfe{10, 20, 40, 80, 160};
  auto errors = [&](const SamplerSpec& spec) {
    std::vector<double> e;
    for (int n : nfe) e.push_back(terminal_rmse(run_sampler(spec, n, x1, score, sched, nullptr).samples, exact));
    return e;
  };
  const auto euler = errors(default_spec(SamplerKind::kEuler));
  auto tab1_spec = default_spec(SamplerKind::kDeis);
  tab1_spec.order = 1;
  const auto tab1 = errors(tab1_spec);
  const auto tab3 = errors(default_spec(SamplerKind::kDeis));
  const double s_euler = fit_convergence_order(nfe, euler).value_or(NAN);
  const double s_tab3 = fit_convergence_order(nfe, tab3).value_or(NAN);
  out.require(std::abs(s_euler - 1.0) <= 0.3, fmt("Euler slope %.3f in 1.0 +- 0.3", s_euler));
  out.require(s_tab3 >= 2.7, fmt("tAB3 slope %.3f >= 2.7", s_tab3));
  out.require(tab3[0] < tab1[0], fmt("NFE 10 RMSE tAB3 %.3e", tab3[0]) + fmt(" < tAB1 %.3e", tab1[0]));
  out.require(tab1[0] < euler[0], fmt("tAB1 %.3e", tab1[0]) + fmt(" < Euler %.3e", euler[0]));
}

void profile_fidelity(Outcome& out) {
  const auto sched = test::standard_schedule();
  const double c = 0.5;
  const MixtureScore score(test::single_gaussian(8, c), sched);
  for (auto [batch, tol] : {std::pair{256, 0.05}, std::pair{10000, 0.01}}) {
    const auto p = collect_profile(score, sched, 1000, batch, 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < p.knots.size(); ++k) {
      const auto [a, s] = sched.alpha_sigma(p.knots[k]);
      const double expect = std::sqrt(2.0 / (M_PI * (a * a * c * c + s * s)));
      worst = std::max(worst, std::abs(p.values[k] / expect - 1.0));
    }
    out.require(worst <= tol, "batch " + std::to_string(batch) + fmt(": max deviation %.2f%%", 100 * worst) +
                                  fmt(" <= %.0f%%", 100 * tol));
    bool truncated = true;
    for (double t : {0.0, 0.001, 0.002, 0.004, 0.0049999}) {
      truncated = truncated && profile_lookup(p, t) == profile_lookup(p, 0.005);
    }
    out.require(truncated, "lookup(t < 0.005) == lookup(0.005)");
  }
}

void curve_shape(Outcome& out) {
  const auto sched = test::standard_schedule();
  const MixtureScore score(test::three_component_mixture(), sched);
  const auto p = collect_profile(score, sched, 1000, 4096, 1);
  const auto rows = score_curves(sched, p);
  double lo = INFINITY, hi = 0.0, at_start = NAN, at_half = NAN;
  for (const auto& r : rows) {
    if (r.t >= 0.2 - 1e-12) {
      lo = std::min(lo, r.product);
      hi = std::max(hi, r.product);
    }
    if (std::abs(r.t - 0.005) < 1e-12) at_start = r.product;
    if (std::abs(r.t - 0.5) < 1e-12) at_half = r.product;
  }
  const double variation = (hi - lo) / hi;
  out.require(variation <= 0.2, fmt("variation over [0.2, 1] = %.1f%% <= 20%%", 100 * variation));
  out.require(at_start > at_half, fmt("product(0.005) = %.4f", at_start) + fmt(" > product(0.5) = %.4f", at_half));
}

void sn_harness(Outcome& out, const fs::path& work) {
  const std::string sweep = std::string(kMixtureConfig) +
                            "[sweep]\n"
                            "samplers = deis:3:sigma:quadratic, deis:3:score-norm:quadratic\n"
                            "nfe = 5, 8, 10, 15, 20, 50\n"
                            "batch = 256\n"
                            "seed = 0\n"
                            "reference_nfe = 1000\n"
                            "[profile]\n"
                            "nfe = 1000\n"
                            "batch = 256\n"
                            "seed = 1\n";
  const auto cfg = parse_config(sweep);
  const auto first = run_converge(cfg, std::nullopt, work / "sn_a");
  run_converge(cfg, std::nullopt, work / "sn_b");
  const bool same = csv_body(work / "sn_a" / "report.csv") == csv_body(work / "sn_b" / "report.csv") &&
                    read_text_file(work / "sn_a" / "report.json") == read_text_file(work / "sn_b" / "report.json");
  out.require(same, "two sweeps byte-identical");

  bool complete = true;
  for (const auto& r : first) {
    for (const auto& pt : r.points) complete = complete && pt.error.empty();
  }
  out.require(complete && first.size() == 4, "paired tables complete");

  const auto control = parse_config(sweep + "source = sigma-control\n");
  const auto ctl = run_converge(control, std::nullopt, work / "sn_control");
  double worst = 0.0;
  std::size_t pairs = 0;
  for (const auto& vanilla : ctl) {
    if (vanilla.reparam != "sigma") continue;
    for (const auto& sn : ctl) {
      if (sn.reparam != "score-norm" || sn.metric != vanilla.metric) continue;
      ++pairs;
      for (std::size_t i = 0; i < vanilla.points.size(); ++i) {
        worst = std::max(worst, std::abs(vanilla.points[i].value - sn.points[i].value));
      }
    }
  }
  out.require(pairs == 2, "control pairs found for both metrics");
  out.require(worst <= 1e-10, fmt("control |SN - vanilla| = %.1e <= 1e-10", worst));

  for (const auto& r : first) {
    std::string line = "  observed " + r.sampler + "/" + r.reparam + " " + r.metric + ":";
    for (const auto& pt : r.points) line += " " + std::to_string(pt.nfe) + fmt("=%.4g", pt.value);
    std::printf("%s\n", line.c_str());
  }
}

void determinism(Outcome& out, const fs::path& work) {
  const std::string base = std::string(kMixtureConfig) +
                           "[sweep]\n"
                           "samplers = deis:3:sigma:quadratic, deis:3:score-norm:quadratic, "
                           "euler:0:identity:linear, ddim:0:sigma:linear\n"
                           "nfe = 5, 10\n"
                           "batch = 300\n"
                           "seed = 0\n";
  const std::string tail = "[profile]\nnfe = 200\nbatch = 300\nseed = 1\n";
  std::vector<fs::path> dirs;
  for (int threads : {1, 4, 1}) {
    const auto cfg = parse_config(base + "threads = " + std::to_string(threads) + "\n" + tail);
    const auto dir = work / ("det_" + std::to_string(dirs.size()));
    fs::create_directories(dir);
    run_profile(cfg, dir / "profile.csv");
    run_coeffs(cfg, cfg.samplers[1], 10, dir / "profile.csv", dir / "coeffs.csv");
    run_sample(cfg, {cfg.samplers[1], 10, 300, std::nullopt}, std::nullopt, dir / "samples.csv");
    run_converge(cfg, std::nullopt, dir);
    run_curves(cfg, dir / "profile.csv", dir / "curves.csv");
    dirs.push_back(dir);
  }
  for (const char* name : {"profile.csv", "coeffs.csv", "samples.csv", "report.csv", "curves.csv"}) {
    bool same = true;
    for (std::size_t k = 1; k < dirs.size(); ++k) {
      same = same && csv_body(dirs[0] / name) == csv_body(dirs[k] / name);
    }
    out.require(same, std::string(name) + " identical across runs and 1/4 threads");
  }
}

}  // namespace

int main() {
  const auto work = fs::temp_directory_path() / "deis_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  criterion("schedule identities", 1, schedule_identities);
  criterion("score oracle vs finite differences", 5, score_oracle);
  criterion("closed-form order-zero coefficients", 1, closed_form_coefficients);
  criterion("DDIM equivalence", 5, ddim_equivalence);
  criterion("exact-flow convergence", 30, exact_flow_convergence);
  criterion("profile fidelity", 60, profile_fidelity);
  criterion("s_bar * sigma curve shape", 60, curve_shape);
  criterion("score-normalisation comparison harness", 120,
            [&](Outcome& o) { sn_harness(o, work); });
  criterion("determinism", 60, [&](Outcome& o) { determinism(o, work); });

  fs::remove_all(work);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
