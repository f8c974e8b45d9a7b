#include <nnghmc/experiment.hpp>

#include <nnghmc/data_io.hpp>
#include <nnghmc/gp_surrogate.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace nnghmc {

using nlohmann::json;

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TargetSpec, family, a, b, c, dim, variances, variance_seed, n, d, k,
                                                data_seed, prior, prior_scale, csv_path, csv_label,
                                                csv_positive_label, csv_subsample, csv_seed, csv_standardize,
                                                arch_order, garch_order, arch, garch, prior_sd, noise_sd,
                                                prior_location, prior_log_scale)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(OracleSpec, kind, hidden, blocks, epochs, batch, seed, minibatch,
                                                friction, mh_correction, gp_max_points)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SamplerSpec, leapfrog_steps, step_size, iterations, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScheduleSpec, collect_start, start, end, interval, probe, threshold,
                                                collect_every, fixed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExperimentConfig, target, oracle, sampler, schedule, init, output_dir)

namespace {

void reject_unknown_keys(const json& given, const json& reference, const std::string& where) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    if (!reference.contains(key)) throw ConfigError("config: unknown key '" + where + key + "'");
    if (value.is_object()) reject_unknown_keys(value, reference[key], where + key + ".");
  }
}

json eval_counters(const EvalCounters& e) {
  return {{"exact_gradient", e.exact_gradient}, {"oracle_gradient", e.oracle_gradient}, {"potential", e.potential}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text << '\n';
}

std::vector<std::string> draw_header(Index dim) {
  std::vector<std::string> h;
  for (Index j = 0; j < dim; ++j) h.push_back("q" + std::to_string(j + 1));
  return h;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(j, json(ExperimentConfig{}), "");
  try {
    return j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& config) { return json(config).dump(2); }

HmcConfig hmc_config(const ExperimentConfig& config) {
  HmcConfig h;
  h.leapfrog_steps = config.sampler.leapfrog_steps;
  h.step_size = config.sampler.step_size;
  h.n_iterations = config.sampler.iterations;
  h.seed = config.sampler.seed;
  return h;
}

TrainingSchedule training_schedule(const ExperimentConfig& config) {
  const ScheduleSpec& s = config.schedule;
  if (s.fixed) return TrainingSchedule::fixed(s.start, s.collect_every, s.collect_start);
  TrainingSchedule t;
  t.collect_start = s.collect_start;
  t.start_iter = s.start;
  t.end_iter = s.end;
  t.check_interval = s.interval;
  t.acceptance_target = s.threshold;
  t.probe_draws = s.probe;
  t.collect_every = s.collect_every;
  return t;
}

NetSpec net_spec(const ExperimentConfig& config) {
  return NetSpec{config.oracle.hidden, config.oracle.blocks, config.oracle.seed};
}

TrainConfig train_config(const ExperimentConfig& config) {
  TrainConfig t;
  t.epochs = config.oracle.epochs;
  t.batch_size = config.oracle.batch;
  t.seed = config.oracle.seed;
  return t;
}

SghmcConfig sghmc_config(const ExperimentConfig& config) {
  SghmcConfig s;
  s.step_size = config.sampler.step_size;
  s.leapfrog_steps = config.sampler.leapfrog_steps;
  s.minibatch_size = config.oracle.minibatch;
  s.friction = config.oracle.friction;
  s.mh_correction = config.oracle.mh_correction;
  s.n_iterations = config.sampler.iterations;
  s.seed = config.sampler.seed;
  return s;
}

void validate_config(const ExperimentConfig& config) {
  static const std::set<std::string> families{"banana", "gaussian", "logistic", "garch", "gp_regression"};
  static const std::set<std::string> kinds{"exact", "nn", "sghmc", "gp_surrogate"};
  const TargetSpec& t = config.target;
  if (!families.count(t.family)) throw ConfigError("config: unknown target family '" + t.family + "'");
  if (!kinds.count(config.oracle.kind)) throw ConfigError("config: unknown oracle kind '" + config.oracle.kind + "'");
  try {
    hmc_config(config).validate();
    if (config.oracle.kind == "nn") {
      training_schedule(config).validate();
      if (config.oracle.hidden < 0 || config.oracle.blocks < 1 || config.oracle.epochs < 0 || config.oracle.batch < 1) {
        throw std::invalid_argument("network settings must be non-negative with blocks, batch >= 1");
      }
    }
    if (config.oracle.kind == "sghmc") {
      if (t.family != "logistic") throw std::invalid_argument("sghmc needs the logistic target");
      sghmc_config(config).validate();
    }
    if (config.oracle.kind == "gp_surrogate") {
      if (config.schedule.start < 2 || config.schedule.start >= config.sampler.iterations) {
        throw std::invalid_argument("gp_surrogate collects schedule.start iterations; need 2 <= start < iterations");
      }
      if (config.oracle.gp_max_points < 2) throw std::invalid_argument("gp_max_points must be >= 2");
    }
    if (t.family == "gaussian" && t.variances.empty() && t.dim < 2) {
      throw std::invalid_argument("ill-conditioned gaussian needs dim >= 2");
    }
    if (t.family == "logistic" && t.prior != "gaussian" && t.prior != "laplace") {
      throw std::invalid_argument("logistic prior must be gaussian or laplace");
    }
    if (t.family == "garch") {
      if (static_cast<int>(t.arch.size()) != t.arch_order + 1 || static_cast<int>(t.garch.size()) != t.garch_order) {
        throw std::invalid_argument("garch: arch needs arch_order + 1 entries and garch needs garch_order entries");
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!config.init.empty()) resolve_init(config, *build_target(t));
}

Vector resolve_init(const ExperimentConfig& config, const TargetModel& target) {
  Vector init = config.init.empty()
                    ? default_init(target, config.target)
                    : Vector(Eigen::Map<const Vector>(config.init.data(), static_cast<Index>(config.init.size())));
  if (init.size() != target.dim()) throw ConfigError("config: init has the wrong dimension");
  if (!target.in_support(init)) throw ConfigError("config: init is outside the target's support");
  return init;
}

std::unique_ptr<TargetModel> build_target(const TargetSpec& t) {
  if (t.family == "banana") return std::make_unique<BananaTarget>(t.a, t.b, t.c);
  if (t.family == "gaussian") {
    Vector v = t.variances.empty() ? ill_conditioned_variances(t.dim, t.variance_seed)
                                   : Eigen::Map<const Vector>(t.variances.data(), static_cast<Index>(t.variances.size()));
    return std::make_unique<DiagonalGaussianTarget>(std::move(v));
  }
  if (t.family == "logistic") {
    CoefficientPrior prior{t.prior == "laplace" ? CoefficientPrior::Kind::laplace : CoefficientPrior::Kind::gaussian,
                           t.prior_scale};
    Dataset ds;
    if (!t.csv_path.empty()) {
      CsvSchema schema;
      schema.label = t.csv_label;
      schema.classification = true;
      if (!t.csv_positive_label.empty()) schema.positive_label = t.csv_positive_label;
      schema.subsample = t.csv_subsample;
      schema.subsample_seed = t.csv_seed;
      if (t.csv_standardize) schema.standardize = {"*"};
      ds = load_csv(t.csv_path, schema);
    } else {
      ds = gen_logistic(t.n, t.d, t.data_seed).data;
    }
    return std::make_unique<LogisticRegressionTarget>(std::move(ds.x), std::move(ds.y), prior);
  }
  if (t.family == "garch") {
    const Vector arch = Eigen::Map<const Vector>(t.arch.data(), static_cast<Index>(t.arch.size()));
    const Vector garch = Eigen::Map<const Vector>(t.garch.data(), static_cast<Index>(t.garch.size()));
    return std::make_unique<GarchTarget>(gen_garch(t.n, arch, garch, t.data_seed), t.arch_order, t.garch_order,
                                         t.prior_sd);
  }
  if (t.family == "gp_regression") {
    Dataset ds = gen_gp_regression(t.n, t.k, t.data_seed, t.noise_sd);
    const LogNormalPrior prior{t.prior_location, t.prior_log_scale};
    return std::make_unique<GpRegressionTarget>(std::move(ds.x), std::move(ds.y), prior, prior);
  }
  throw ConfigError("config: unknown target family '" + t.family + "'");
}

Vector default_init(const TargetModel& target, const TargetSpec& spec) {
  if (spec.family == "banana") return (Vector(2) << 0.0, 100.0 * spec.b / spec.c).finished();
  if (spec.family == "garch") {
    const auto& g = dynamic_cast<const GarchTarget&>(target);
    Vector q(target.dim());
    const int m = g.arch_order();
    const int r = g.garch_order();
    double persistence = 0.0;
    for (int j = 1; j <= m; ++j) persistence += q[j] = 0.1 / m;
    for (int j = 0; j < r; ++j) persistence += q[1 + m + j] = 0.5 / std::max(r, 1);
    q[0] = g.presample_variance() * (1.0 - persistence);
    return q;
  }
  return Vector::Zero(target.dim());
}

namespace {

RunResult run_gp_surrogate(const TargetModel& target, const ExperimentConfig& config, const Vector& init) {
  const HmcConfig hc = hmc_config(config);
  HmcSampler sampler(target, hc, init);
  ExactOracle exact(target);
  ChainRecorder recorder(hc.n_iterations, target.dim());
  std::vector<Vector> points{init};
  std::vector<double> values{sampler.potential()};
  Stopwatch clock;
  PhaseTimes times;
  const long collect = config.schedule.start;
  for (long t = 0; t < collect; ++t) {
    const StepResult r = sampler.step(exact);
    recorder.record(sampler.position(), r, false);
    if (r.accepted && static_cast<Index>(points.size()) < config.oracle.gp_max_points) {
      points.push_back(sampler.position());
      values.push_back(sampler.potential());
    }
  }
  times.collection = clock.seconds();
  clock.reset();
  Matrix x(static_cast<Index>(points.size()), target.dim());
  Vector u(static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    x.row(static_cast<Index>(i)) = points[i].transpose();
    u[static_cast<Index>(i)] = values[i];
  }
  auto gp = std::make_shared<const GpSurrogate>(GpSurrogate::fit(std::move(x), std::move(u)));
  GpSurrogateOracle oracle(gp);
  times.training = clock.seconds();
  clock.reset();
  for (long t = collect; t < hc.n_iterations; ++t) {
    const StepResult r = sampler.step(oracle);
    recorder.record(sampler.position(), r, true);
  }
  times.sampling = clock.seconds();
  RunResult out;
  out.oracle = "gp_surrogate";
  out.chain = recorder.finish();
  out.chain.elapsed = times;
  out.chain.evals = sampler.evals();
  out.adopted = true;
  out.adoption_iteration = collect;
  out.training_pairs = gp->size();
  out.gp_length_scale = gp->length_scale();
  out.gp_noise = gp->noise();
  return out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const std::unique_ptr<TargetModel> target = build_target(config.target);
  const Vector init = resolve_init(config, *target);

  const std::string& kind = config.oracle.kind;
  if (kind == "exact") {
    ExactOracle oracle(*target);
    RunResult r;
    r.oracle = kind;
    r.chain = run_chain(*target, oracle, hmc_config(config), init);
    return r;
  }
  if (kind == "nn") {
    NnghmcResult n = run_nnghmc(*target, hmc_config(config), training_schedule(config), net_spec(config),
                                train_config(config), init);
    RunResult r;
    r.oracle = kind;
    r.chain = std::move(n.chain);
    r.net = n.net;
    r.adopted = n.adopted;
    r.adoption_iteration = n.adoption_iteration;
    r.training_pairs = n.training_pairs;
    r.checks = std::move(n.checks);
    return r;
  }
  if (kind == "sghmc") {
    RunResult r;
    r.oracle = kind;
    r.chain = sghmc_run(dynamic_cast<const MinibatchTarget&>(*target), sghmc_config(config), init);
    return r;
  }
  return run_gp_surrogate(*target, config, init);
}

std::string summary_json(const ExperimentConfig& config, const RunResult& run) {
  const Chain& c = run.chain;
  json s;
  s["target"] = config.target.family;
  s["oracle"] = run.oracle;
  s["iterations"] = c.size();
  s["dim"] = c.dim();
  s["acceptance"] = c.acceptance_rate();
  auto rate_or_null = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  s["acceptance_exact_phase"] = rate_or_null(c.acceptance_rate(false));
  s["acceptance_surrogate_phase"] = rate_or_null(c.acceptance_rate(true));
  long divergent = 0;
  for (double dh : c.delta_h) divergent += std::isinf(dh) ? 1 : 0;
  s["infinite_delta_h"] = divergent;
  s["timing"] = {{"collection", c.elapsed.collection},
                 {"training", c.elapsed.training},
                 {"sampling", c.elapsed.sampling},
                 {"total", c.elapsed.total()}};
  s["evals"] = eval_counters(c.evals);
  if (c.size() >= 112) {
    const EssReport e = ess(c.draws, kDefaultBurnIn, c.elapsed.total());
    s["ess"] = {{"min", e.min},
                {"median", e.median},
                {"max", e.max},
                {"per_dim", std::vector<double>(e.per_dim.data(), e.per_dim.data() + e.per_dim.size())},
                {"burn_in", e.burn_in},
                {"degenerate", e.degenerate},
                {"median_per_second", e.median_per_second}};
  }
  const Vector mean = post_burn_in_mean(c.draws);
  s["posterior_mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
  if (run.oracle == "nn" || run.oracle == "gp_surrogate") {
    s["adopted"] = run.adopted;
    s["adoption_iteration"] = run.adoption_iteration;
    s["training_pairs"] = run.training_pairs;
  }
  if (run.oracle == "nn") {
    json checks = json::array();
    for (const auto& ch : run.checks) {
      checks.push_back({{"iteration", ch.iteration},
                        {"training_pairs", ch.training_pairs},
                        {"final_loss", ch.final_loss},
                        {"exact_acceptance", ch.exact_acceptance},
                        {"probe_acceptance", ch.probe_acceptance},
                        {"adopted", ch.adopted}});
    }
    s["schedule_checks"] = checks;
  }
  if (run.oracle == "gp_surrogate") s["gp"] = {{"length_scale", run.gp_length_scale}, {"noise", run.gp_noise}};
  return s.dump(2);
}

std::string cmd_sample(const ExperimentConfig& config, bool overwrite) {
  validate_config(config);
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!overwrite) throw ConfigError("output directory " + dir.string() + " is not empty; pass --overwrite or choose a new one");
    for (const char* f : {"draws.csv", "summary.json", "config.resolved.json", "net.json"}) fs::remove(dir / f);
  }
  fs::create_directories(dir);
  write_text(dir / "config.resolved.json", config_to_json(config));
  const RunResult run = run_experiment(config);
  write_matrix_csv((dir / "draws.csv").string(), draw_header(run.chain.dim()), run.chain.draws);
  write_text(dir / "summary.json", summary_json(config, run));
  if (run.net) run.net->save((dir / "net.json").string());
  return dir.string();
}

Comparison cmd_compare(const std::vector<ExperimentConfig>& configs, std::size_t baseline) {
  if (configs.empty()) throw ConfigError("compare: no configs given");
  if (baseline >= configs.size()) throw ConfigError("compare: baseline index out of range");
  for (const auto& c : configs) {
    validate_config(c);
    if (!(c.target == configs.front().target)) throw ConfigError("compare: configs describe different targets");
  }
  std::vector<RunResult> runs;
  for (const auto& c : configs) runs.push_back(run_experiment(c));
  std::vector<SpeedInput> inputs;
  for (std::size_t i = 0; i < runs.size(); ++i) inputs.push_back({runs[i].oracle + "#" + std::to_string(i), &runs[i].chain});
  Comparison out;
  out.rows = speed_report(inputs, baseline);
  out.table = format_speed_table(out.rows);
  json j;
  j["baseline"] = baseline;
  j["rows"] = json::array();
  for (const auto& r : out.rows) {
    j["rows"].push_back({{"label", r.label},
                         {"acceptance", r.acceptance},
                         {"ess", {r.ess_min, r.ess_median, r.ess_max}},
                         {"seconds", r.seconds},
                         {"median_ess_per_second", r.median_ess_per_second},
                         {"speedup", r.speedup}});
  }
  j["pairs"] = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (i == baseline) continue;
    const ChainComparison cc = compare_chains(runs[baseline].chain.draws, runs[i].chain.draws);
    j["pairs"].push_back({{"baseline", baseline},
                          {"other", i},
                          {"ks", std::vector<double>(cc.ks.data(), cc.ks.data() + cc.ks.size())},
                          {"mean_z", std::vector<double>(cc.mean_z.data(), cc.mean_z.data() + cc.mean_z.size())},
                          {"variance_z",
                           std::vector<double>(cc.variance_z.data(), cc.variance_z.data() + cc.variance_z.size())},
                          {"max_ks", cc.max_ks},
                          {"max_abs_mean_z", cc.max_abs_mean_z}});
  }
  out.json = j.dump(2);
  return out;
}

bool cmd_verify(std::ostream& out, const VerifyOptions& options) {
  bool all = true;
  for (const auto& r : run_property_suite(options)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }
  return all;
}

EssReport cmd_ess(const std::string& draws_csv, double burn_in) {
  return ess(read_matrix_csv(draws_csv), burn_in, 0.0);
}

}  // namespace nnghmc
