#pragma once

#include <nnghmc/diagnostics.hpp>
#include <nnghmc/hmc.hpp>
#include <nnghmc/mlp.hpp>
#include <nnghmc/properties.hpp>
#include <nnghmc/schedule.hpp>
#include <nnghmc/sghmc.hpp>
#include <nnghmc/targets.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnghmc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every target family shares one flat record; fields a family does not use
/// are ignored but still echoed in the resolved config.
struct TargetSpec {
  std::string family = "banana";  // banana | gaussian | logistic | garch | gp_regression
  // banana
  double a = 1.0;
  double b = 0.1;
  double c = 17.5;
  // gaussian: explicit variances, or ill-conditioned ones of length dim
  Index dim = 30;
  std::vector<double> variances;
  std::uint64_t variance_seed = 1;
  // synthetic data
  Index n = 1000;
  Index d = 10;
  Index k = 4;
  std::uint64_t data_seed = 1;
  // logistic prior
  std::string prior = "gaussian";  // gaussian (variance) | laplace (scale)
  double prior_scale = 10.0;
  // logistic from CSV instead of synthetic data
  std::string csv_path;
  std::string csv_label = "y";
  std::string csv_positive_label;
  Index csv_subsample = 0;
  std::uint64_t csv_seed = 0;
  bool csv_standardize = true;
  // garch
  int arch_order = 2;
  int garch_order = 1;
  std::vector<double> arch{0.1, 0.2, 0.1};
  std::vector<double> garch{0.4};
  double prior_sd = 10.0;
  // gp_regression
  double noise_sd = 0.5;
  double prior_location = 0.0;
  double prior_log_scale = 3.0;

  bool operator==(const TargetSpec&) const = default;
};

struct OracleSpec {
  std::string kind = "nn";  // exact | nn | sghmc | gp_surrogate
  int hidden = 100;
  int blocks = 1;
  int epochs = 50;
  Index batch = 32;
  std::uint64_t seed = 1;
  // sghmc
  Index minibatch = 500;
  double friction = 0.1;
  bool mh_correction = true;
  // gp_surrogate: at most this many distinct collected draws are fitted
  Index gp_max_points = 1000;

  bool operator==(const OracleSpec&) const = default;
};

struct SamplerSpec {
  int leapfrog_steps = 10;
  double step_size = 0.1;
  long iterations = 1000;
  std::uint64_t seed = 1;

  bool operator==(const SamplerSpec&) const = default;
};

struct ScheduleSpec {
  long collect_start = 0;
  long start = 400;
  long end = 1000;
  long interval = 200;
  long probe = 50;
  double threshold = 0.9;
  int collect_every = 1;
  // Switch at `start` without probing.
  bool fixed = false;

  bool operator==(const ScheduleSpec&) const = default;
};

struct ExperimentConfig {
  TargetSpec target;
  OracleSpec oracle;
  SamplerSpec sampler;
  ScheduleSpec schedule;
  std::vector<double> init;  // empty: family default
  std::string output_dir = "run";

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved form with every default spelled out.
std::string config_to_json(const ExperimentConfig& config);

/// Throws ConfigError describing the first problem found.
void validate_config(const ExperimentConfig& config);

HmcConfig hmc_config(const ExperimentConfig& config);
TrainingSchedule training_schedule(const ExperimentConfig& config);
NetSpec net_spec(const ExperimentConfig& config);
TrainConfig train_config(const ExperimentConfig& config);
SghmcConfig sghmc_config(const ExperimentConfig& config);

std::unique_ptr<TargetModel> build_target(const TargetSpec& spec);
Vector default_init(const TargetModel& target, const TargetSpec& spec);
/// The config's init, or the family default when it is empty; throws
/// ConfigError on a wrong dimension or a point outside the support.
Vector resolve_init(const ExperimentConfig& config, const TargetModel& target);

struct RunResult {
  Chain chain;
  std::shared_ptr<const MlpGradientNet> net;
  std::string oracle;
  bool adopted = false;
  long adoption_iteration = -1;
  Index training_pairs = 0;
  std::vector<ScheduleCheck> checks;
  double gp_length_scale = 0.0;
  double gp_noise = 0.0;
};

RunResult run_experiment(const ExperimentConfig& config);

/// Machine-readable summary: acceptance by phase, ESS, timings, counters.
std::string summary_json(const ExperimentConfig& config, const RunResult& run);

/// Runs the config and writes draws.csv, summary.json, config.resolved.json
/// and, for the network oracle, net.json. Refuses a non-empty directory
/// unless `overwrite`. Returns the directory used.
std::string cmd_sample(const ExperimentConfig& config, bool overwrite = false);

struct Comparison {
  std::vector<SpeedRow> rows;
  std::string table;
  std::string json;
};

/// All configs must describe the same target.
Comparison cmd_compare(const std::vector<ExperimentConfig>& configs, std::size_t baseline);

/// Prints one line per property check; true when all pass.
bool cmd_verify(std::ostream& out, const VerifyOptions& options = {});

EssReport cmd_ess(const std::string& draws_csv, double burn_in = kDefaultBurnIn);

}  // namespace nnghmc
