#pragma once

#include <nnghmc/common.hpp>

#include <cstdint>
#include <limits>
#include <span>
#include <string>

namespace nnghmc {

inline constexpr double kInfinitePotential = std::numeric_limits<double>::infinity();

/// A posterior expressed as potential energy U(q) = -log of the unnormalized
/// density, with its analytic gradient.
///
/// Additive constants are dropped. `potential` returns +infinity exactly when
/// `in_support` is false; `gradient` throws there, so callers check first.
/// Implementations are immutable after construction and safe to share.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual Index dim() const = 0;
  virtual std::string name() const = 0;
  virtual bool in_support(const Vector& q) const;

  double potential(const Vector& q) const;
  Vector gradient(const Vector& q) const;

 protected:
  virtual double potential_impl(const Vector& q) const = 0;
  virtual Vector gradient_impl(const Vector& q) const = 0;

  void check_dim(const Vector& q) const;
};

/// Targets whose likelihood is a sum over independent observations, so an
/// unbiased minibatch estimate of the gradient exists.
class MinibatchTarget : public TargetModel {
 public:
  virtual Index n_observations() const = 0;

  /// Prior gradient plus (n / |rows|) times the likelihood gradient summed
  /// over `rows`.
  virtual Vector minibatch_gradient(const Vector& q, std::span<const Index> rows) const = 0;
};

/// U(x) = (A x1)^2 / 200 + 1/2 (C x2 + B (A x1)^2 - 100 B)^2
class BananaTarget final : public TargetModel {
 public:
  BananaTarget(double a, double b, double c);

  Index dim() const override { return 2; }
  std::string name() const override { return "banana"; }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }

 protected:
  double potential_impl(const Vector& q) const override;
  Vector gradient_impl(const Vector& q) const override;

 private:
  double a_;
  double b_;
  double c_;
};

/// Zero-mean Gaussian with diagonal covariance.
class DiagonalGaussianTarget final : public TargetModel {
 public:
  explicit DiagonalGaussianTarget(Vector variances);

  Index dim() const override { return variances_.size(); }
  std::string name() const override { return "gaussian"; }
  const Vector& variances() const { return variances_; }

 protected:
  double potential_impl(const Vector& q) const override;
  Vector gradient_impl(const Vector& q) const override;

 private:
  Vector variances_;
  Vector precisions_;
};

/// Diagonal variances with the smallest entry `smallest` first, the largest
/// `largest` last and the rest uniform on [lo, hi].
Vector ill_conditioned_variances(Index dim, std::uint64_t seed, double smallest = 0.1,
                                 double largest = 1000.0, double lo = 1.0, double hi = 100.0);

struct CoefficientPrior {
  enum class Kind { gaussian, laplace };
  Kind kind = Kind::gaussian;
  /// Variance for the Gaussian prior, scale b for the Laplace prior.
  double scale = 10.0;

  double neg_log_density(const Vector& beta) const;
  Vector neg_log_density_gradient(const Vector& beta) const;
};

/// Bayesian logistic regression with y in {0, 1}.
class LogisticRegressionTarget final : public MinibatchTarget {
 public:
  LogisticRegressionTarget(Matrix x, Vector y, CoefficientPrior prior);

  Index dim() const override { return x_.cols(); }
  std::string name() const override { return "logistic"; }
  Index n_observations() const override { return x_.rows(); }

  Vector minibatch_gradient(const Vector& q, std::span<const Index> rows) const override;

  const CoefficientPrior& prior() const { return prior_; }
  const Matrix& design() const { return x_; }
  const Vector& response() const { return y_; }

 protected:
  double potential_impl(const Vector& q) const override;
  Vector gradient_impl(const Vector& q) const override;

 private:
  Matrix x_;
  Matrix columns_;  // x_ transposed: observation i is a contiguous column
  Vector y_;
  CoefficientPrior prior_;
};

/// GARCH(m, r) with zero-mean Gaussian observations. Parameters are
/// (alpha_0, alpha_1..alpha_m, beta_1..beta_r) in the natural constrained
/// space; the likelihood conditions on the first max(m, r) observations
/// whose conditional variances are set to the sample variance of y.
class GarchTarget final : public TargetModel {
 public:
  GarchTarget(Vector y, int arch_order, int garch_order, double prior_sd = 10.0);

  Index dim() const override { return 1 + arch_order_ + garch_order_; }
  std::string name() const override { return "garch"; }
  bool in_support(const Vector& q) const override;

  /// Conditional variances for every t; the first max(m, r) entries hold
  /// the pre-sample value.
  Vector variance_recursion(const Vector& params) const;

  int arch_order() const { return arch_order_; }
  int garch_order() const { return garch_order_; }
  double presample_variance() const { return presample_variance_; }
  const Vector& observations() const { return y_; }

 protected:
  double potential_impl(const Vector& q) const override;
  Vector gradient_impl(const Vector& q) const override;

 private:
  Vector y_;
  Vector y2_;
  int arch_order_;
  int garch_order_;
  double prior_sd_;
  double presample_variance_;
};

/// Matern covariance with smoothness 1.5 and unit amplitude.
double matern15(double distance, double length_scale);

struct LogNormalPrior {
  double location = 0.0;
  double scale = 3.0;
};

/// GP regression hyperparameter posterior, sampled in log space:
/// q = (log l, log sigma^2). Lognormal priors on l and sigma^2 become
/// Gaussian priors on q.
class GpRegressionTarget final : public TargetModel {
 public:
  GpRegressionTarget(Matrix x, Vector y, LogNormalPrior length_scale_prior = {},
                     LogNormalPrior noise_prior = {});

  Index dim() const override { return 2; }
  std::string name() const override { return "gp_regression"; }
  bool in_support(const Vector& q) const override;

  /// 1/2 y^T C^-1 y + 1/2 log det C with C = K(X, X) + noise I. Returns
  /// +infinity when C fails to factor.
  double data_potential(double length_scale, double noise) const;
  double neg_log_prior(const Vector& q) const;

  const Matrix& distances() const { return distances_; }

 protected:
  double potential_impl(const Vector& q) const override;
  Vector gradient_impl(const Vector& q) const override;

 private:
  Matrix x_;
  Vector y_;
  Matrix distances_;
  LogNormalPrior length_prior_;
  LogNormalPrior noise_prior_;
};

}  // namespace nnghmc
