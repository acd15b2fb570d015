// SPDX-License-Identifier: Apache-2.0
#include "deis/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deis/coeffs.hpp"
#include "deis/csv.hpp"
#include "deis/error.hpp"

namespace deis {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"schedule", {"beta_min", "beta_max", "n_discrete"}},
      {"oracle", {"dim", "weights", "stds"}},  // plus mean_<k>
      {"sweep",
       {"samplers", "nfe", "batch", "seed", "metric", "projections",
        "reference_nfe", "subdivisions", "threads"}},
      {"profile", {"source", "nfe", "batch", "seed", "truncation", "control_scale"}},
      {"output", {"dir"}},
  };
  return keys;
}

/// Reads typed values from one section, turning parse failures into config
/// errors that name the key.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) const {
    if (tree_ == nullptr) return std::nullopt;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return std::string(trim(it->second.data()));
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  template <class Fn>
  auto convert(const std::string& key, Fn fn) const {
    try {
      return fn(*raw(key));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, path(key) + ": " + e.what());
    }
  }

  double get_double(const std::string& key, double fallback) const {
    if (!raw(key)) return fallback;
    return convert(key, [&](const std::string& v) { return parse_double(v, path(key)); });
  }

  long long get_int(const std::string& key, long long fallback) const {
    if (!raw(key)) return fallback;
    return convert(key, [&](const std::string& v) { return parse_int(v, path(key)); });
  }

  std::vector<double> get_doubles(const std::string& key) const {
    if (!raw(key)) throw Error(ErrorCode::kConfig, path(key) + ": missing");
    return convert(key, [&](const std::string& v) {
      std::vector<double> out;
      for (const auto& f : split_fields(v)) out.push_back(parse_double(f, path(key)));
      return out;
    });
  }

  const pt::ptree* tree() const { return tree_; }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, key + ": " + message);
}

std::vector<std::string> preamble(const ExperimentConfig& cfg, std::uint64_t seed,
                                  const std::string& extra = {}) {
  std::string line = "config_hash=" + cfg.hash + " seed=" + std::to_string(seed);
  if (!extra.empty()) line += " " + extra;
  return {line};
}

std::vector<TimeGrid> control_grids(const ExperimentConfig& cfg) {
  std::vector<TimeGrid> grids;
  for (const auto& spec : cfg.samplers) {
    if (spec.kind != SamplerKind::kDeis || spec.reparam != ReparamKind::kScoreNorm) continue;
    for (int n : cfg.nfe) grids.push_back(make_time_grid(spec.grid, n));
  }
  return grids;
}

void check_not_input(const std::optional<std::filesystem::path>& input,
                     const std::filesystem::path& out) {
  if (input && std::filesystem::exists(out) && std::filesystem::exists(*input) &&
      std::filesystem::equivalent(*input, out)) {
    throw Error(ErrorCode::kIo, "refusing to overwrite input " + out.string());
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NoiseSchedule ExperimentConfig::schedule() const {
  return NoiseSchedule::vp_linear(beta_min, beta_max, n_discrete);
}

GaussianMixture ExperimentConfig::mixture() const {
  return GaussianMixture(dim, components);
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree root;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config: ") + e.what());
  }

  for (const auto& [name, section] : root) {
    const auto it = schema().find(name);
    require(it != schema().end() && !section.empty(), name, "unknown section or top-level key");
    for (const auto& [key, value] : section) {
      const bool mean_key = name == "oracle" && key.rfind("mean_", 0) == 0;
      require(mean_key || it->second.count(key) > 0, name + "." + key, "unknown key");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = root.find(name);
    return Section(it == root.not_found() ? nullptr : &it->second, name);
  };

  ExperimentConfig cfg;
  cfg.hash = fnv1a_hex(text);

  const auto schedule = section("schedule");
  cfg.beta_min = schedule.get_double("beta_min", cfg.beta_min);
  cfg.beta_max = schedule.get_double("beta_max", cfg.beta_max);
  cfg.n_discrete = static_cast<int>(schedule.get_int("n_discrete", cfg.n_discrete));
  require(cfg.beta_min > 0 && cfg.beta_min < cfg.beta_max && cfg.beta_max < 1,
          "schedule.beta_min", "need 0 < beta_min < beta_max < 1");
  require(cfg.n_discrete >= 2, "schedule.n_discrete", "must be >= 2");

  const auto oracle = section("oracle");
  require(oracle.tree() != nullptr, "oracle", "section is required");
  const auto dim = oracle.get_int("dim", 0);
  require(dim > 0, "oracle.dim", "must be a positive integer");
  cfg.dim = static_cast<std::size_t>(dim);
  const auto weights = oracle.get_doubles("weights");
  const auto stds = oracle.get_doubles("stds");
  require(!weights.empty(), "oracle.weights", "needs at least one component");
  require(stds.size() == weights.size(), "oracle.stds", "must have one entry per weight");
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto key = "mean_" + std::to_string(k);
    MixtureComponent c;
    c.weight = weights[k];
    c.std = stds[k];
    c.mean = oracle.get_doubles(key);
    require(c.mean.size() == cfg.dim, oracle.path(key), "must have oracle.dim entries");
    cfg.components.push_back(std::move(c));
  }
  for (const auto& [key, value] : *oracle.tree()) {
    if (key.rfind("mean_", 0) != 0) continue;
    const auto idx = key.substr(5);
    bool ok = !idx.empty() && idx.find_first_not_of("0123456789") == std::string::npos;
    ok = ok && std::stoull(idx) < weights.size();
    require(ok, oracle.path(key), "does not match a component");
  }
  try {
    (void)cfg.mixture();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("oracle: ") + e.what());
  }

  const auto sweep = section("sweep");
  if (auto list = sweep.raw("samplers")) {
    cfg.samplers = sweep.convert("samplers", [](const std::string& v) {
      std::vector<SamplerSpec> out;
      for (const auto& f : split_fields(v)) out.push_back(parse_sampler_spec(f));
      return out;
    });
  } else {
    cfg.samplers = {default_spec(SamplerKind::kDeis)};
  }
  if (sweep.raw("nfe")) {
    for (double v : sweep.get_doubles("nfe")) {
      require(v >= 1 && v == static_cast<int>(v), "sweep.nfe", "entries must be positive integers");
      cfg.nfe.push_back(static_cast<int>(v));
    }
    for (std::size_t i = 1; i < cfg.nfe.size(); ++i) {
      require(cfg.nfe[i] > cfg.nfe[i - 1], "sweep.nfe", "must be strictly increasing");
    }
  } else {
    cfg.nfe = {10};
  }
  cfg.batch = static_cast<int>(sweep.get_int("batch", cfg.batch));
  cfg.seed = static_cast<std::uint64_t>(sweep.get_int("seed", 0));
  if (auto m = sweep.raw("metric")) {
    cfg.metric = sweep.convert("metric", [](const std::string& v) { return parse_metric_kind(v); });
  }
  cfg.projections = static_cast<int>(sweep.get_int("projections", cfg.projections));
  cfg.reference_nfe = static_cast<int>(sweep.get_int("reference_nfe", cfg.reference_nfe));
  cfg.subdivisions = static_cast<int>(sweep.get_int("subdivisions", cfg.subdivisions));
  cfg.threads = static_cast<int>(sweep.get_int("threads", cfg.threads));
  require(cfg.batch >= 1, "sweep.batch", "must be >= 1");
  require(cfg.projections >= 1, "sweep.projections", "must be >= 1");
  require(cfg.reference_nfe >= 0, "sweep.reference_nfe", "must be >= 0");
  require(cfg.subdivisions >= 1, "sweep.subdivisions", "must be >= 1");
  require(cfg.threads >= 0, "sweep.threads", "must be >= 0");

  const auto profile = section("profile");
  if (auto src = profile.raw("source")) {
    require(*src == "collect" || *src == "sigma-control", "profile.source",
            "must be 'collect' or 'sigma-control'");
    cfg.profile_source = *src == "collect" ? ProfileSource::kCollect : ProfileSource::kSigmaControl;
  }
  cfg.profile_nfe = static_cast<int>(profile.get_int("nfe", cfg.profile_nfe));
  cfg.profile_batch = static_cast<int>(profile.get_int("batch", cfg.profile_batch));
  cfg.profile_seed = static_cast<std::uint64_t>(profile.get_int("seed", 1));
  cfg.truncation = profile.get_double("truncation", cfg.truncation);
  cfg.control_scale = profile.get_double("control_scale", cfg.control_scale);
  require(cfg.profile_nfe >= 2, "profile.nfe", "must be >= 2");
  require(cfg.profile_batch >= 1, "profile.batch", "must be >= 1");
  require(cfg.truncation >= 0 && cfg.truncation <= 1, "profile.truncation", "must be in [0, 1]");
  require(cfg.control_scale > 0, "profile.control_scale", "must be positive");
  require(cfg.profile_seed != cfg.seed, "profile.seed",
          "must differ from sweep.seed (profiles come from separate generations)");

  if (auto dir = section("output").raw("dir")) cfg.output_dir = *dir;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return parse_config(text);
}

ScoreMagnitudeProfile obtain_profile(const ExperimentConfig& cfg,
                                     const std::optional<std::filesystem::path>& path,
                                     std::span<const TimeGrid> extra_grids) {
  if (path) return read_profile_csv(*path, cfg.truncation);
  const auto sched = cfg.schedule();
  if (cfg.profile_source == ProfileSource::kSigmaControl) {
    auto grids = control_grids(cfg);
    grids.insert(grids.end(), extra_grids.begin(), extra_grids.end());
    if (grids.empty()) {
      throw Error(ErrorCode::kConfig,
                  "profile.source: sigma-control needs a score-norm sampler or grid");
    }
    return make_sigma_proportional_profile(sched, grids, cfg.subdivisions, cfg.control_scale);
  }
  const MixtureScore score(cfg.mixture(), sched);
  return collect_profile(score, sched, cfg.profile_nfe, cfg.profile_batch,
                         cfg.profile_seed, cfg.truncation, cfg.subdivisions, cfg.threads);
}

ScoreMagnitudeProfile run_profile(const ExperimentConfig& cfg,
                                  const std::filesystem::path& out) {
  auto p = obtain_profile(cfg, std::nullopt);
  const auto extra = "batch=" + std::to_string(p.batch_size) + " nfe=" +
                     std::to_string(p.nfe_used) +
                     " truncation=" + format_double(p.truncation_threshold);
  write_file_atomic(out, format_profile_csv(p, preamble(cfg, cfg.profile_seed, extra)));
  return p;
}

CoefficientTable run_coeffs(const ExperimentConfig& cfg, const SamplerSpec& spec,
                            int nfe,
                            const std::optional<std::filesystem::path>& profile,
                            const std::filesystem::path& out) {
  check_not_input(profile, out);
  const auto sched = cfg.schedule();
  const auto grid = make_time_grid(spec.grid, nfe);
  std::optional<ScoreMagnitudeProfile> p;
  if (spec.reparam == ReparamKind::kScoreNorm) p = obtain_profile(cfg, profile, {&grid, 1});
  const auto rep = Reparameterisation::make(spec.reparam, p ? &*p : nullptr);
  auto table = compute_coefficients(grid, spec.order, rep, sched, cfg.subdivisions);
  write_file_atomic(out, format_coefficients_csv(table, preamble(cfg, cfg.seed,
                                                                 "sampler=" + spec.to_string())));
  return table;
}

Batch run_sample(const ExperimentConfig& cfg, const SampleRequest& request,
                 const std::optional<std::filesystem::path>& profile,
                 const std::filesystem::path& out) {
  check_not_input(profile, out);
  const int nfe = request.nfe.value_or(cfg.nfe.back());
  const int batch = request.batch.value_or(cfg.batch);
  const auto seed = request.seed.value_or(cfg.seed);
  if (nfe < 1) throw Error(ErrorCode::kConfig, "nfe must be >= 1");
  if (batch < 1) throw Error(ErrorCode::kConfig, "batch must be >= 1");

  const auto sched = cfg.schedule();
  const MixtureScore score(cfg.mixture(), sched);
  std::optional<ScoreMagnitudeProfile> p;
  if (request.spec.kind == SamplerKind::kDeis &&
      request.spec.reparam == ReparamKind::kScoreNorm) {
    const auto grid = make_time_grid(request.spec.grid, nfe);
    p = obtain_profile(cfg, profile, {&grid, 1});
    if (p->nfe_used > 0 && p->seed == seed) {
      throw Error(ErrorCode::kConfig, "evaluation seed equals profile seed " + std::to_string(seed));
    }
  }
  const auto x1 = standard_normal_batch(static_cast<std::size_t>(batch), cfg.dim, seed);
  RunOptions options;
  options.threads = cfg.threads;
  auto result = run_sampler(request.spec, nfe, x1, score, sched, p ? &*p : nullptr,
                            cfg.subdivisions, options);
  write_file_atomic(out, format_samples_csv(
                             result.samples,
                             preamble(cfg, seed, "sampler=" + request.spec.to_string() +
                                                     " nfe=" + std::to_string(result.nfe))));
  return std::move(result.samples);
}

std::vector<ConvergenceReport> run_converge(
    const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& profile,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  check_not_input(profile, out_dir / "report.csv");
  bool needs_profile = false;
  for (const auto& s : cfg.samplers) {
    needs_profile |= s.kind == SamplerKind::kDeis && s.reparam == ReparamKind::kScoreNorm;
  }
  std::optional<ScoreMagnitudeProfile> p;
  if (needs_profile) p = obtain_profile(cfg, profile);

  StudyConfig study{cfg.schedule(), cfg.mixture(), cfg.samplers, cfg.nfe, cfg.batch,
                    cfg.seed, cfg.metric, cfg.projections, cfg.reference_nfe,
                    cfg.subdivisions, cfg.threads, p ? &*p : nullptr};
  auto reports = convergence_study(study);
  write_file_atomic(out_dir / "report.csv",
                    format_report_csv(reports, preamble(cfg, cfg.seed)));
  write_file_atomic(out_dir / "report.json", format_report_json(reports, cfg.hash, cfg.seed));
  return reports;
}

std::vector<CurveRow> run_curves(const ExperimentConfig& cfg,
                                 const std::optional<std::filesystem::path>& profile,
                                 const std::filesystem::path& out) {
  check_not_input(profile, out);
  const auto p = obtain_profile(cfg, profile);
  auto rows = score_curves(cfg.schedule(), p);
  write_file_atomic(out, format_curves_csv(rows, preamble(cfg, cfg.profile_seed)));
  return rows;
}

std::string format_report_csv(const std::vector<ConvergenceReport>& reports,
                              const std::vector<std::string>& pre) {
  std::string out;
  append_preamble(out, pre);
  out += "sampler,reparam,nfe,metric,value,seed\n";
  for (const auto& r : reports) {
    for (const auto& p : r.points) {
      out += r.sampler + ',' + r.reparam + ',' + std::to_string(p.nfe) + ',' + r.metric +
             ',' + format_double(p.value) + ',' + std::to_string(r.seed) + '\n';
    }
  }
  return out;
}

std::string format_report_json(const std::vector<ConvergenceReport>& reports,
                               const std::string& config_hash, std::uint64_t seed) {
  nlohmann::json doc;
  doc["config_hash"] = config_hash;
  doc["seed"] = seed;
  doc["reports"] = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json item;
    item["sampler"] = r.sampler;
    item["reparam"] = r.reparam;
    item["grid"] = r.grid;
    item["metric"] = r.metric;
    item["seed"] = r.seed;
    item["oracle"] = r.oracle;
    item["slope"] = r.slope ? nlohmann::json(*r.slope) : nlohmann::json(nullptr);
    item["points"] = nlohmann::json::array();
    for (const auto& p : r.points) {
      nlohmann::json point{{"nfe", p.nfe}, {"value", p.value}};
      if (!p.error.empty()) point["error"] = p.error;
      item["points"].push_back(std::move(point));
    }
    doc["reports"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

std::string format_curves_csv(const std::vector<CurveRow>& rows,
                              const std::vector<std::string>& pre) {
  std::string out;
  append_preamble(out, pre);
  out += "t,s_bar,sigma,product\n";
  for (const auto& r : rows) {
    out += format_double(r.t) + ',' + format_double(r.s_bar) + ',' +
           format_double(r.sigma) + ',' + format_double(r.product) + '\n';
  }
  return out;
}

std::string format_samples_csv(const Batch& samples, const std::vector<std::string>& pre) {
  std::string out;
  append_preamble(out, pre);
  for (std::size_t d = 0; d < samples.dim; ++d) {
    out += (d ? ",x" : "x") + std::to_string(d);
  }
  out += '\n';
  for (std::size_t i = 0; i < samples.rows; ++i) {
    const auto row = samples.row(i);
    for (std::size_t d = 0; d < row.size(); ++d) {
      if (d) out += ',';
      out += format_double(row[d]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace deis
