// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <string>

#include "deis/csv.hpp"
#include "deis/error.hpp"
#include "deis/experiment.hpp"

using namespace deis;
namespace fs = std::filesystem;

namespace {

const std::string kBase = R"(
[schedule]
beta_min = 0.0001
beta_max = 0.02

[oracle]
dim = 2
weights = 0.1, 0.8, 0.1
stds = 0.002, 0.002, 0.002
mean_0 = -4, 0
mean_1 = 0, 0
mean_2 = 4, 0

[sweep]
samplers = deis:3:sigma:quadratic, deis:3:score-norm:quadratic, euler:0:identity:linear
nfe = 5, 10
batch = 64
seed = 0

[profile]
nfe = 50
batch = 64
seed = 1
)";

ErrorCode config_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

std::string message_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string body(const std::string& text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end - pos);
    if (line.rfind("#", 0) != 0) out += line + "\n";
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("deis_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("a valid config parses") {
  const auto cfg = parse_config(kBase);
  CHECK(cfg.dim == 2);
  CHECK(cfg.components.size() == 3);
  CHECK(cfg.samplers.size() == 3);
  CHECK(cfg.samplers[1].reparam == ReparamKind::kScoreNorm);
  CHECK(cfg.nfe == std::vector<int>{5, 10});
  CHECK(cfg.profile_seed == 1);
  CHECK(cfg.hash.size() == 16);
  CHECK(cfg.hash == fnv1a_hex(kBase));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cfg.n_discrete == 1000);
  CHECK(cfg.truncation == 0.005);
}

TEST_CASE("profile seed equal to the evaluation seed is rejected") {
  auto text = kBase;
  text.replace(text.find("seed = 1"), 8, "seed = 0");
  CHECK(config_error(text) == ErrorCode::kConfig);
  CHECK(message_of(text).find("profile.seed") != std::string::npos);
}

TEST_CASE("schema errors name the offending key") {
  auto unknown = kBase;
  unknown.replace(unknown.find("[sweep]\n"), 8, "[sweep]\nbatchsize = 3\n");
  CHECK(message_of(unknown).find("sweep.batchsize") != std::string::npos);
  CHECK(message_of(kBase + "\n[extras]\nx = 1\n").find("extras") != std::string::npos);
  auto bad_batch = kBase;
  bad_batch.replace(bad_batch.find("batch = 64"), 10, "batch = -3");
  CHECK(message_of(bad_batch).find("sweep.batch") != std::string::npos);
  auto bad_mean = kBase;
  bad_mean.replace(bad_mean.find("mean_2 = 4, 0"), 13, "mean_2 = 4");
  CHECK(message_of(bad_mean).find("oracle.mean_2") != std::string::npos);
  auto bad_weights = kBase;
  bad_weights.replace(bad_weights.find("0.1, 0.8, 0.1"), 13, "0.2, 0.8, 0.1");
  CHECK(config_error(bad_weights) == ErrorCode::kConfig);
  auto bad_nfe = kBase;
  bad_nfe.replace(bad_nfe.find("nfe = 5, 10"), 11, "nfe = 10, 5");
  CHECK(message_of(bad_nfe).find("sweep.nfe") != std::string::npos);
  auto bad_sampler = kBase;
  bad_sampler.replace(bad_sampler.find("euler:0"), 7, "heun:0");
  CHECK(message_of(bad_sampler).find("sweep.samplers") != std::string::npos);
  CHECK(config_error("[schedule]\nbeta_min = 0.1\n") == ErrorCode::kConfig);
  CHECK(config_error("not an ini [") == ErrorCode::kConfig);
  CHECK_THROWS_AS(load_config("/nonexistent/deis.ini"), Error);
}

TEST_CASE("pipelines write artifacts with provenance") {
  TempDir dir("pipeline");
  auto cfg = parse_config(kBase);
  cfg.output_dir = dir.path;

  run_profile(cfg, dir.path / "profile.csv");
  const auto profile_text = read_text_file(dir.path / "profile.csv");
  CHECK(profile_text.rfind("# config_hash=" + cfg.hash + " seed=1", 0) == 0);

  run_coeffs(cfg, cfg.samplers[1], 5, dir.path / "profile.csv", dir.path / "coeffs.csv");
  CHECK(read_text_file(dir.path / "coeffs.csv").find("i,t_i,t_prev,j,C_ij\n") != std::string::npos);

  SampleRequest request{cfg.samplers[0], 5, 8, std::nullopt};
  const auto samples = run_sample(cfg, request, std::nullopt, dir.path / "samples.csv");
  CHECK(samples.rows == 8);
  const auto sample_text = read_text_file(dir.path / "samples.csv");
  CHECK(sample_text.rfind("# config_hash=" + cfg.hash + " seed=0", 0) == 0);
  CHECK(body(sample_text).rfind("x0,x1\n", 0) == 0);

  const auto reports = run_converge(cfg, dir.path / "profile.csv", dir.path);
  CHECK(reports.size() == 3);
  const auto report_csv = read_text_file(dir.path / "report.csv");
  CHECK(body(report_csv).rfind("sampler,reparam,nfe,metric,value,seed\n", 0) == 0);
  const auto json = nlohmann::json::parse(read_text_file(dir.path / "report.json"));
  CHECK(json["config_hash"] == cfg.hash);
  CHECK(json["reports"].size() == 3);

  const auto rows = run_curves(cfg, dir.path / "profile.csv", dir.path / "curves.csv");
  CHECK(rows.size() == 50);
  CHECK(body(read_text_file(dir.path / "curves.csv")).rfind("t,s_bar,sigma,product\n", 0) == 0);

  for (const auto& entry : fs::directory_iterator(dir.path)) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("runs are reproducible") {
  TempDir a("repro_a"), b("repro_b");
  auto cfg = parse_config(kBase);
  cfg.threads = 1;
  run_converge(cfg, std::nullopt, a.path);
  cfg.threads = 3;
  run_converge(cfg, std::nullopt, b.path);
  CHECK(read_text_file(a.path / "report.csv") == read_text_file(b.path / "report.csv"));
  CHECK(read_text_file(a.path / "report.json") == read_text_file(b.path / "report.json"));
}

TEST_CASE("sampling with the profile seed is refused") {
  TempDir dir("seed_clash");
  const auto cfg = parse_config(kBase);
  SampleRequest request{cfg.samplers[1], 5, 4, std::uint64_t{1}};
  try {
    (void)run_sample(cfg, request, std::nullopt, dir.path / "s.csv");
    FAIL("profile seed reused for evaluation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
  }
  request.seed = 7;
  CHECK_NOTHROW(run_sample(cfg, request, std::nullopt, dir.path / "s.csv"));
}

TEST_CASE("an input profile is never overwritten") {
  TempDir dir("no_clobber");
  const auto cfg = parse_config(kBase);
  run_profile(cfg, dir.path / "p.csv");
  const auto before = read_text_file(dir.path / "p.csv");
  CHECK_THROWS_AS(run_curves(cfg, dir.path / "p.csv", dir.path / "p.csv"), Error);
  CHECK(read_text_file(dir.path / "p.csv") == before);
}

TEST_CASE("sigma-control profile makes score-norm equal vanilla") {
  TempDir dir("control");
  auto text = kBase + "source = sigma-control\n";
  const auto cfg = parse_config(text);
  const auto reports = run_converge(cfg, std::nullopt, dir.path);
  REQUIRE(reports.size() == 3);
  for (std::size_t i = 0; i < reports[0].points.size(); ++i) {
    CHECK(std::abs(reports[0].points[i].value - reports[1].points[i].value) <= 1e-10);
  }
}
