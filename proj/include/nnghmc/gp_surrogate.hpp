#pragma once

#include <nnghmc/common.hpp>

#include <vector>

namespace nnghmc {

/// Candidate hyperparameters for the maximum-likelihood grid search.
struct GpGrid {
  std::vector<double> length_scales;
  std::vector<double> noises;

  /// l: 10 log-spaced points on [0.1, 100]; noise: 6 on [1e-6, 1].
  static GpGrid standard();
  static GpGrid log_spaced(double l_lo, double l_hi, int n_l, double s_lo, double s_hi, int n_s);
};

struct GpGridScore {
  double length_scale;
  double noise;
  double log_marginal_likelihood;  // -inf when the covariance failed to factor
};

/// Squared-exponential kernel exp(-|x - x'|^2 / (2 l^2)).
double squared_exponential(double squared_distance, double length_scale);

/// GP regression of potential values U(q) on positions, used as a surrogate
/// whose predictive-mean gradient stands in for grad U.
///
/// Targets are centred on their sample mean (a constant mean function), so the
/// gradient of the predictive mean is unaffected. Fitting costs O(N^3) per grid
/// candidate.
class GpSurrogate {
 public:
  /// Grid-search (l, noise) by log marginal likelihood, then cache the
  /// factorization. Requires N >= 2.
  static GpSurrogate fit(Matrix positions, Vector values, const GpGrid& grid = GpGrid::standard());

  /// Fixed hyperparameters; throws std::runtime_error if the covariance does
  /// not factor even after adding 1e-8 jitter.
  GpSurrogate(Matrix positions, Vector values, double length_scale, double noise);

  Index dim() const { return positions_.cols(); }
  Index size() const { return positions_.rows(); }
  double length_scale() const { return length_scale_; }
  double noise() const { return noise_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return log_marginal_likelihood_; }
  const std::vector<GpGridScore>& grid_scores() const { return grid_scores_; }

  double predict_mean(const Vector& q) const;
  /// sum_i alpha_i k(q, x_i) (x_i - q) / l^2
  Vector gradient_of_mean(const Vector& q) const;

  /// Log marginal likelihood of centred values; -inf if the covariance fails
  /// to factor even with jitter.
  static double log_marginal_likelihood(const Matrix& positions, const Vector& centred_values,
                                        double length_scale, double noise);

 private:
  Matrix positions_;
  Vector centred_;
  double mean_ = 0.0;
  double length_scale_ = 1.0;
  double noise_ = 0.0;
  double jitter_ = 0.0;
  double log_marginal_likelihood_ = 0.0;
  Vector alpha_;
  std::vector<GpGridScore> grid_scores_;
};

}  // namespace nnghmc
