#include <nnghmc/experiment.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kUsageError = 1;
constexpr int kVerifyFailed = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian Monte Carlo with neural-network gradients"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Print more detail");

  auto* sample = app.add_subcommand("sample", "Run one experiment config and write a run directory");
  std::string config_path;
  std::string out_dir;
  bool overwrite = false;
  sample->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sample->add_option("-o,--out", out_dir, "Override the config's output directory");
  sample->add_flag("--overwrite", overwrite, "Replace outputs in a non-empty run directory");

  auto* compare = app.add_subcommand("compare", "Run several configs on one target and tabulate speed");
  std::vector<std::string> compare_paths;
  std::size_t baseline = 0;
  std::string compare_json;
  compare->add_option("configs", compare_paths, "Experiment configs")->required()->check(CLI::ExistingFile);
  compare->add_option("-b,--baseline", baseline, "Index of the baseline config");
  compare->add_option("--json", compare_json, "Write the comparison records to this file");

  auto* verify = app.add_subcommand("verify", "Run the integrator property checks");
  long chi_draws = 200000;
  verify->add_option("--chi-square-draws", chi_draws, "Chain length for the exactness check (0 skips it)");

  auto* ess_cmd = app.add_subcommand("ess", "Recompute effective sample sizes from draws.csv");
  std::string draws_path;
  double burn_in = nnghmc::kDefaultBurnIn;
  ess_cmd->add_option("draws", draws_path, "draws.csv from a run directory")->required()->check(CLI::ExistingFile);
  ess_cmd->add_option("--burn-in", burn_in, "Leading fraction to drop")->check(CLI::Range(0.0, 0.99));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*sample) {
      nnghmc::ExperimentConfig cfg = nnghmc::load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      const std::string dir = nnghmc::cmd_sample(cfg, overwrite);
      std::cout << dir << '\n';
      if (verbosity > 0) {
        std::ifstream in(dir + "/summary.json");
        std::cout << in.rdbuf() << '\n';
      }
    } else if (*compare) {
      std::vector<nnghmc::ExperimentConfig> cfgs;
      for (const auto& p : compare_paths) cfgs.push_back(nnghmc::load_config(p));
      const nnghmc::Comparison c = nnghmc::cmd_compare(cfgs, baseline);
      std::cout << c.table;
      if (!compare_json.empty()) {
        std::ofstream out(compare_json);
        out << c.json << '\n';
      }
      if (verbosity > 0) std::cout << c.json << '\n';
    } else if (*verify) {
      nnghmc::VerifyOptions opts;
      opts.chi_square_draws = chi_draws;
      if (!nnghmc::cmd_verify(std::cout, opts)) return kVerifyFailed;
    } else if (*ess_cmd) {
      const nnghmc::EssReport r = nnghmc::cmd_ess(draws_path, burn_in);
      std::printf("draws used %ld  ESS min %.1f  median %.1f  max %.1f%s\n", static_cast<long>(r.n_used), r.min,
                  r.median, r.max, r.degenerate ? "  (degenerate dimension)" : "");
      if (verbosity > 0) {
        for (Eigen::Index j = 0; j < r.per_dim.size(); ++j) std::printf("q%ld %.1f\n", static_cast<long>(j + 1), r.per_dim[j]);
      }
    }
  } catch (const nnghmc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return 0;
}
