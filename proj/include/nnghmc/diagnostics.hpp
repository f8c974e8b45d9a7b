#pragma once

#include <nnghmc/hmc.hpp>

#include <string>
#include <vector>

namespace nnghmc {

constexpr double kDefaultBurnIn = 0.1;

struct UnivariateEss {
  double value = 1.0;
  bool degenerate = false;  // constant series; value is 1
};

/// n / (1 + 2 sum rho(k)) with the lag sum cut by Geyer's initial positive
/// sequence. Clamped to [1, n].
UnivariateEss effective_sample_size(const Vector& series);

struct EssReport {
  Vector per_dim;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  double burn_in = kDefaultBurnIn;
  Index n_used = 0;
  bool degenerate = false;  // any dimension constant
  double seconds = 0.0;
  double median_per_second = 0.0;  // 0 when seconds is not positive
};

/// Drops the leading `burn_in` fraction; at least 100 draws must remain.
EssReport ess(const Matrix& draws, double burn_in = kDefaultBurnIn, double seconds = 0.0);

double median(std::vector<double> v);

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_statistic(const Vector& a, const Vector& b);

struct ChainComparison {
  Vector ks;          // per dimension
  Vector mean_z;      // (mean_a - mean_b) / joint Monte Carlo SE
  Vector variance_z;  // same for variances
  double max_ks = 0.0;
  double max_abs_mean_z = 0.0;
};

/// Burn-in is removed from both chains; SEs use each chain's ESS.
ChainComparison compare_chains(const Matrix& a, const Matrix& b, double burn_in = kDefaultBurnIn);

/// Monte Carlo standard error of each coordinate mean.
Vector mc_standard_errors(const Matrix& draws, double burn_in = kDefaultBurnIn);
Vector post_burn_in_mean(const Matrix& draws, double burn_in = kDefaultBurnIn);

struct SpeedInput {
  std::string label;
  const Chain* chain = nullptr;
};

struct SpeedRow {
  std::string label;
  double acceptance = 0.0;
  double ess_min = 0.0;
  double ess_median = 0.0;
  double ess_max = 0.0;
  double seconds = 0.0;  // collection + training + sampling
  double median_ess_per_second = 0.0;
  double speedup = 0.0;
};

/// Speed-up is median ESS/s relative to `inputs[baseline]`, with every
/// phase of a run charged to its time.
std::vector<SpeedRow> speed_report(const std::vector<SpeedInput>& inputs, std::size_t baseline);

std::string format_speed_table(const std::vector<SpeedRow>& rows);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson goodness-of-fit of `x` against N(0, 1) on `bins` equiprobable bins.
ChiSquareResult chi_square_standard_normal(const Vector& x, int bins);

}  // namespace nnghmc
