#include <nnghmc/targets.hpp>

#include <cmath>
#include <stdexcept>

namespace nnghmc {

namespace {

// log(1 + exp(x)) without overflow.
double log1p_exp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

bool TargetModel::in_support(const Vector& q) const { return all_finite(q); }

void TargetModel::check_dim(const Vector& q) const {
  if (q.size() != dim()) {
    throw std::invalid_argument(name() + ": expected a " + std::to_string(dim()) +
                                "-vector, got length " + std::to_string(q.size()));
  }
}

double TargetModel::potential(const Vector& q) const {
  check_dim(q);
  if (!in_support(q)) return kInfinitePotential;
  return potential_impl(q);
}

Vector TargetModel::gradient(const Vector& q) const {
  check_dim(q);
  if (!in_support(q)) throw std::domain_error(name() + ": gradient requested outside the support");
  return gradient_impl(q);
}

// ---------------------------------------------------------------- banana

BananaTarget::BananaTarget(double a, double b, double c) : a_(a), b_(b), c_(c) {}

double BananaTarget::potential_impl(const Vector& q) const {
  const double ax = a_ * q[0];
  const double r = c_ * q[1] + b_ * ax * ax - 100.0 * b_;
  return ax * ax / 200.0 + 0.5 * r * r;
}

Vector BananaTarget::gradient_impl(const Vector& q) const {
  const double ax = a_ * q[0];
  const double r = c_ * q[1] + b_ * ax * ax - 100.0 * b_;
  Vector g(2);
  g[0] = a_ * ax / 100.0 + r * 2.0 * b_ * a_ * ax;
  g[1] = r * c_;
  return g;
}

// -------------------------------------------------------------- gaussian

DiagonalGaussianTarget::DiagonalGaussianTarget(Vector variances)
    : variances_(std::move(variances)) {
  if (variances_.size() == 0) throw std::invalid_argument("gaussian: empty variance vector");
  if ((variances_.array() <= 0.0).any() || !variances_.allFinite()) {
    throw std::invalid_argument("gaussian: variances must be positive and finite");
  }
  precisions_ = variances_.cwiseInverse();
}

double DiagonalGaussianTarget::potential_impl(const Vector& q) const {
  return 0.5 * (q.array().square() * precisions_.array()).sum();
}

Vector DiagonalGaussianTarget::gradient_impl(const Vector& q) const {
  return q.cwiseProduct(precisions_);
}

Vector ill_conditioned_variances(Index dim, std::uint64_t seed, double smallest, double largest,
                                 double lo, double hi) {
  if (dim < 2) throw std::invalid_argument("ill_conditioned_variances: dim must be >= 2");
  Rng rng = make_rng(seed, Stream::data);
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(dim);
  v[0] = smallest;
  for (Index i = 1; i + 1 < dim; ++i) v[i] = unif(rng);
  v[dim - 1] = largest;
  return v;
}

// -------------------------------------------------------------- logistic

double CoefficientPrior::neg_log_density(const Vector& beta) const {
  switch (kind) {
    case Kind::gaussian:
      return 0.5 * beta.squaredNorm() / scale;
    case Kind::laplace:
      return beta.lpNorm<1>() / scale;
  }
  return 0.0;
}

Vector CoefficientPrior::neg_log_density_gradient(const Vector& beta) const {
  switch (kind) {
    case Kind::gaussian:
      return beta / scale;
    case Kind::laplace:
      return beta.unaryExpr([](double b) { return static_cast<double>((b > 0.0) - (b < 0.0)); }) /
             scale;
  }
  return Vector::Zero(beta.size());
}

LogisticRegressionTarget::LogisticRegressionTarget(Matrix x, Vector y, CoefficientPrior prior)
    : x_(std::move(x)), columns_(x_.transpose()), y_(std::move(y)), prior_(prior) {
  if (x_.rows() != y_.size()) throw std::invalid_argument("logistic: X and y row counts differ");
  if (x_.cols() == 0) throw std::invalid_argument("logistic: no features");
  if (!(prior_.scale > 0.0)) throw std::invalid_argument("logistic: prior scale must be positive");
  for (Index i = 0; i < y_.size(); ++i) {
    if (y_[i] != 0.0 && y_[i] != 1.0) throw std::invalid_argument("logistic: y must be 0/1");
  }
}

double LogisticRegressionTarget::potential_impl(const Vector& q) const {
  const Vector eta = x_ * q;
  double nll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) nll += log1p_exp(eta[i]) - y_[i] * eta[i];
  return nll + prior_.neg_log_density(q);
}

Vector LogisticRegressionTarget::gradient_impl(const Vector& q) const {
  Vector resid = x_ * q;
  for (Index i = 0; i < resid.size(); ++i) resid[i] = logistic(resid[i]) - y_[i];
  return x_.transpose() * resid + prior_.neg_log_density_gradient(q);
}

Vector LogisticRegressionTarget::minibatch_gradient(const Vector& q,
                                                    std::span<const Index> rows) const {
  check_dim(q);
  if (rows.empty()) throw std::invalid_argument("logistic: empty minibatch");
  Vector g = Vector::Zero(dim());
  for (Index i : rows) {
    const double resid = logistic(columns_.col(i).dot(q)) - y_[i];
    g.noalias() += resid * columns_.col(i);
  }
  g *= static_cast<double>(x_.rows()) / static_cast<double>(rows.size());
  return g + prior_.neg_log_density_gradient(q);
}

// ----------------------------------------------------------------- garch

GarchTarget::GarchTarget(Vector y, int arch_order, int garch_order, double prior_sd)
    : y_(std::move(y)), arch_order_(arch_order), garch_order_(garch_order), prior_sd_(prior_sd) {
  if (arch_order_ < 0 || garch_order_ < 0) throw std::invalid_argument("garch: negative order");
  const Index lag = std::max(arch_order_, garch_order_);
  if (y_.size() <= lag + 1) throw std::invalid_argument("garch: series too short for the orders");
  if (!(prior_sd_ > 0.0)) throw std::invalid_argument("garch: prior sd must be positive");
  y2_ = y_.array().square();
  const double mean = y_.mean();
  presample_variance_ = (y_.array() - mean).square().sum() / static_cast<double>(y_.size() - 1);
}

bool GarchTarget::in_support(const Vector& q) const {
  if (q.size() != dim() || !all_finite(q)) return false;
  if (!(q[0] > 0.0)) return false;
  double persistence = 0.0;
  for (Index j = 1; j < q.size(); ++j) {
    if (q[j] < 0.0) return false;
    persistence += q[j];
  }
  return persistence < 1.0;
}

Vector GarchTarget::variance_recursion(const Vector& params) const {
  check_dim(params);
  if (!in_support(params)) throw std::domain_error("garch: parameters outside the stationarity region");
  const Index n = y_.size();
  const Index lag = std::max(arch_order_, garch_order_);
  Vector s2(n);
  s2.head(lag).setConstant(presample_variance_);
  for (Index t = lag; t < n; ++t) {
    double v = params[0];
    for (int j = 1; j <= arch_order_; ++j) v += params[j] * y2_[t - j];
    for (int j = 1; j <= garch_order_; ++j) v += params[arch_order_ + j] * s2[t - j];
    s2[t] = v;
  }
  return s2;
}

double GarchTarget::potential_impl(const Vector& q) const {
  const Vector s2 = variance_recursion(q);
  const Index lag = std::max(arch_order_, garch_order_);
  double u = 0.0;
  for (Index t = lag; t < y_.size(); ++t) u += 0.5 * (std::log(s2[t]) + y2_[t] / s2[t]);
  return u + 0.5 * q.squaredNorm() / (prior_sd_ * prior_sd_);
}

Vector GarchTarget::gradient_impl(const Vector& q) const {
  const Index n = y_.size();
  const Index d = dim();
  const Index lag = std::max(arch_order_, garch_order_);
  // Rolling window of (sigma^2_t, d sigma^2_t / d q) for the last r steps.
  const Index window = std::max<Index>(garch_order_, 1);
  Vector s2_hist = Vector::Constant(window, presample_variance_);
  Matrix ds2_hist = Matrix::Zero(d, window);
  Vector grad = q / (prior_sd_ * prior_sd_);
  Vector ds2(d);
  Index head = 0;  // slot holding sigma^2_{t-1}
  for (Index t = lag; t < n; ++t) {
    double s2 = q[0];
    ds2.setZero();
    ds2[0] = 1.0;
    for (int j = 1; j <= arch_order_; ++j) {
      s2 += q[j] * y2_[t - j];
      ds2[j] = y2_[t - j];
    }
    for (int j = 1; j <= garch_order_; ++j) {
      const Index slot = (head - (j - 1) + window) % window;
      const double beta = q[arch_order_ + j];
      s2 += beta * s2_hist[slot];
      ds2[arch_order_ + j] += s2_hist[slot];
      ds2.noalias() += beta * ds2_hist.col(slot);
    }
    grad.noalias() += 0.5 * (1.0 / s2 - y2_[t] / (s2 * s2)) * ds2;
    head = (head + 1) % window;
    s2_hist[head] = s2;
    ds2_hist.col(head) = ds2;
  }
  return grad;
}

// ------------------------------------------------------------ gp regression

double matern15(double distance, double length_scale) {
  const double r = std::sqrt(3.0) * distance / length_scale;
  return (1.0 + r) * std::exp(-r);
}

GpRegressionTarget::GpRegressionTarget(Matrix x, Vector y, LogNormalPrior length_scale_prior,
                                       LogNormalPrior noise_prior)
    : x_(std::move(x)),
      y_(std::move(y)),
      length_prior_(length_scale_prior),
      noise_prior_(noise_prior) {
  if (x_.rows() != y_.size() || x_.rows() == 0) {
    throw std::invalid_argument("gp_regression: X and Y must have the same non-zero row count");
  }
  const Index n = x_.rows();
  distances_.resize(n, n);
  for (Index j = 0; j < n; ++j) {
    distances_(j, j) = 0.0;
    for (Index i = j + 1; i < n; ++i) {
      const double d = (x_.row(i) - x_.row(j)).norm();
      distances_(i, j) = d;
      distances_(j, i) = d;
    }
  }
}

bool GpRegressionTarget::in_support(const Vector& q) const {
  // exp() of the log-hyperparameters must stay representable.
  return q.size() == 2 && all_finite(q) && (q.array().abs() < 50.0).all();
}

double GpRegressionTarget::neg_log_prior(const Vector& q) const {
  const double zl = (q[0] - length_prior_.location) / length_prior_.scale;
  const double zn = (q[1] - noise_prior_.location) / noise_prior_.scale;
  return 0.5 * (zl * zl + zn * zn);
}

double GpRegressionTarget::data_potential(double length_scale, double noise) const {
  const Index n = y_.size();
  Matrix c(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) c(i, j) = matern15(distances_(i, j), length_scale);
  }
  c.diagonal().array() += noise;
  Eigen::LLT<Matrix, Eigen::Lower> llt(c);
  if (llt.info() != Eigen::Success) return kInfinitePotential;
  const Vector w = llt.matrixL().solve(y_);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return 0.5 * w.squaredNorm() + 0.5 * log_det;
}

double GpRegressionTarget::potential_impl(const Vector& q) const {
  const double data = data_potential(std::exp(q[0]), std::exp(q[1]));
  if (!std::isfinite(data)) return kInfinitePotential;
  return data + neg_log_prior(q);
}

Vector GpRegressionTarget::gradient_impl(const Vector& q) const {
  const Index n = y_.size();
  const double length_scale = std::exp(q[0]);
  const double noise = std::exp(q[1]);
  const double root3_over_l = std::sqrt(3.0) / length_scale;

  Matrix c(n, n);
  Matrix dk(n, n);  // dK / d log l, lower triangle
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double r = root3_over_l * distances_(i, j);
      const double e = std::exp(-r);
      c(i, j) = (1.0 + r) * e;
      dk(i, j) = r * r * e;
    }
  }
  c.diagonal().array() += noise;
  Eigen::LLT<Matrix, Eigen::Lower> llt(c);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("gp_regression: covariance is not positive definite");
  }
  const Vector alpha = llt.solve(y_);
  const Matrix cinv = llt.solve(Matrix::Identity(n, n));

  // 1/2 sum_ij (C^-1 - alpha alpha^T)_ij dK_ij over the symmetric matrix.
  double g_length = 0.0;
  for (Index j = 0; j < n; ++j) {
    g_length += 0.5 * (cinv(j, j) - alpha[j] * alpha[j]) * dk(j, j);
    for (Index i = j + 1; i < n; ++i) g_length += (cinv(i, j) - alpha[i] * alpha[j]) * dk(i, j);
  }
  const double g_noise = 0.5 * noise * (cinv.trace() - alpha.squaredNorm());

  Vector g(2);
  g[0] = g_length + (q[0] - length_prior_.location) / (length_prior_.scale * length_prior_.scale);
  g[1] = g_noise + (q[1] - noise_prior_.location) / (noise_prior_.scale * noise_prior_.scale);
  return g;
}

}  // namespace nnghmc
