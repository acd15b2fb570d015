// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "deis/batch.hpp"
#include "deis/error.hpp"
#include "deis/metrics.hpp"
#include "support.hpp"

using namespace deis;

TEST_CASE("rmse of a constant offset") {
  Batch a(3, 2), b(3, 2);
  for (double& v : b.data) v = 0.5;
  CHECK(terminal_rmse(a, b) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(terminal_rmse(a, a) == 0.0);
  CHECK_THROWS_AS(terminal_rmse(a, Batch(2, 2)), Error);
}

TEST_CASE("rmse obeys the triangle inequality") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = standard_normal_batch(50, 3, seed);
    const auto b = standard_normal_batch(50, 3, seed + 100);
    const auto c = standard_normal_batch(50, 3, seed + 200);
    CHECK(terminal_rmse(a, c) <= terminal_rmse(a, b) + terminal_rmse(b, c) + 1e-15);
  }
}

TEST_CASE("sliced Wasserstein properties") {
  const auto a = standard_normal_batch(200, 3, 1);
  auto b = standard_normal_batch(200, 3, 2);
  CHECK(sliced_wasserstein(a, a, 32, 7) == 0.0);
  const double ab = sliced_wasserstein(a, b, 32, 7);
  CHECK(ab > 0.0);
  CHECK(ab == sliced_wasserstein(b, a, 32, 7));
  CHECK(ab == sliced_wasserstein(a, b, 32, 7));

  Batch shifted = a;
  for (std::size_t i = 0; i < shifted.rows; ++i) shifted.row(i)[0] += 3.0;
  const double d = sliced_wasserstein(a, shifted, 4000, 8);
  // |<shift, u>| averaged over the unit sphere in 3-D is shift / 2.
  CHECK(d == doctest::Approx(1.5).epsilon(0.03));

  CHECK_THROWS_AS(sliced_wasserstein(a, standard_normal_batch(100, 3, 3), 8, 1), Error);
  CHECK_THROWS_AS(sliced_wasserstein(a, standard_normal_batch(200, 2, 3), 8, 1), Error);
  CHECK_THROWS_AS(sliced_wasserstein(a, b, 0, 1), Error);
}

TEST_CASE("sliced Wasserstein separates accurate and crude samplers") {
  const auto sched = test::standard_schedule();
  const auto mix = test::three_component_mixture();
  const MixtureScore score(mix, sched);
  const auto x1 = standard_normal_batch(512, 2, 11);
  const auto direct = sample_mixture(mix, 512, 12);
  const auto fine = run_sampler(default_spec(SamplerKind::kDeis), 1000, x1, score, sched, nullptr);
  const auto crude = run_sampler(default_spec(SamplerKind::kEuler), 5, x1, score, sched, nullptr);
  CHECK(sliced_wasserstein(fine.samples, direct, 64, 13) <=
        sliced_wasserstein(crude.samples, direct, 64, 13));
}

TEST_CASE("convergence order fit") {
  const std::vector<int> nfe{10, 20, 40, 80};
  std::vector<double> err;
  for (int n : nfe) err.push_back(3.0 * std::pow(n, -2.5));
  CHECK(*fit_convergence_order(nfe, err) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK_FALSE(fit_convergence_order(std::vector<int>{10}, std::vector<double>{0.1}).has_value());
  CHECK_FALSE(fit_convergence_order(std::vector<int>{10, 10}, std::vector<double>{0.1, 0.2})
                  .has_value());
}

TEST_CASE("curve product is the product of its columns") {
  const auto sched = test::standard_schedule();
  const MixtureScore score(test::three_component_mixture(), sched);
  const auto p = collect_profile(score, sched, 100, 64, 1);
  const auto rows = score_curves(sched, p);
  REQUIRE(rows.size() == p.knots.size());
  for (const auto& r : rows) {
    CHECK(r.product == r.s_bar * r.sigma);
    CHECK(r.sigma == sched.sigma(r.t));
  }
}

TEST_CASE("unit Gaussian curve is flat away from zero") {
  const auto sched = test::standard_schedule();
  const MixtureScore score(test::single_gaussian(8, 1.0), sched);
  const auto p = collect_profile(score, sched, 100, 512, 2);
  for (const auto& r : score_curves(sched, p)) {
    if (r.t < 0.3) continue;
    CHECK(r.product == doctest::Approx(std::sqrt(2.0 / M_PI) * r.sigma).epsilon(0.05));
  }
}

TEST_CASE("convergence study is reproducible and ordered") {
  const auto sched = test::standard_schedule();
  StudyConfig cfg{sched, test::single_gaussian(4, 0.5), {}, {10, 20, 40}};
  cfg.samplers = {default_spec(SamplerKind::kEuler), default_spec(SamplerKind::kDeis)};
  cfg.batch = 64;
  cfg.seed = 3;
  const auto a = convergence_study(cfg);
  const auto b = convergence_study(cfg);
  REQUIRE(a.size() == 2);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].metric == "rmse");
    REQUIRE(a[k].points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a[k].points[i].value == b[k].points[i].value);
  }
  CHECK(a[0].sampler == "euler");
  CHECK(a[0].points[0].value > 0.0);
  CHECK(a[0].points[1].value < a[0].points[0].value);
  CHECK(a[1].points[0].value < a[0].points[0].value);
  REQUIRE(a[0].slope.has_value());
  CHECK(*a[0].slope == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("study on a mixture uses sliced Wasserstein and keeps going past failures") {
  const auto sched = test::standard_schedule();
  StudyConfig cfg{sched, test::three_component_mixture(), {}, {5}};
  cfg.samplers = {default_spec(SamplerKind::kDdim),
                  parse_sampler_spec("deis:3:score-norm:quadratic")};
  cfg.batch = 32;
  const auto reports = convergence_study(cfg);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].metric == "sliced-wasserstein");
  CHECK(reports[0].points[0].error.empty());
  CHECK_FALSE(reports[0].slope.has_value());
  CHECK_FALSE(reports[1].points[0].error.empty());
}
