#include <nnghmc/gp_surrogate.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nnghmc {

namespace {

constexpr double kJitter = 1e-8;

Matrix squared_distances(const Matrix& x) {
  const Vector norms = x.rowwise().squaredNorm();
  Matrix d2 = -2.0 * x * x.transpose();
  d2.colwise() += norms;
  d2.rowwise() += norms.transpose();
  return d2.cwiseMax(0.0);
}

// Factor K + noise I, retrying once with jitter. Returns false on failure.
bool factor(const Matrix& d2, double length_scale, double noise, Eigen::LLT<Matrix>& llt,
            double& jitter_used) {
  Matrix k = d2.unaryExpr([length_scale](double s) { return squared_exponential(s, length_scale); });
  k.diagonal().array() += noise;
  llt.compute(k);
  jitter_used = 0.0;
  if (llt.info() == Eigen::Success) return true;
  k.diagonal().array() += kJitter;
  llt.compute(k);
  jitter_used = kJitter;
  return llt.info() == Eigen::Success;
}

double lml_from_factor(const Eigen::LLT<Matrix>& llt, const Vector& y) {
  const Vector w = llt.matrixL().solve(y);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * log_det -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace

double squared_exponential(double squared_distance, double length_scale) {
  return std::exp(-squared_distance / (2.0 * length_scale * length_scale));
}

GpGrid GpGrid::log_spaced(double l_lo, double l_hi, int n_l, double s_lo, double s_hi, int n_s) {
  auto spaced = [](double lo, double hi, int n) {
    std::vector<double> v;
    if (n == 1) return std::vector<double>{lo};
    for (int i = 0; i < n; ++i) {
      v.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)));
    }
    return v;
  };
  return {spaced(l_lo, l_hi, n_l), spaced(s_lo, s_hi, n_s)};
}

GpGrid GpGrid::standard() { return log_spaced(0.1, 100.0, 10, 1e-6, 1.0, 6); }

double GpSurrogate::log_marginal_likelihood(const Matrix& positions, const Vector& centred_values,
                                            double length_scale, double noise) {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
  if (!factor(squared_distances(positions), length_scale, noise, llt, jitter)) {
    return -std::numeric_limits<double>::infinity();
  }
  return lml_from_factor(llt, centred_values);
}

GpSurrogate GpSurrogate::fit(Matrix positions, Vector values, const GpGrid& grid) {
  if (positions.rows() < 2) throw std::invalid_argument("gp_surrogate: need at least 2 points");
  if (positions.rows() != values.size()) throw std::invalid_argument("gp_surrogate: size mismatch");
  if (grid.length_scales.empty() || grid.noises.empty()) {
    throw std::invalid_argument("gp_surrogate: empty hyperparameter grid");
  }
  const Vector centred = values.array() - values.mean();
  const Matrix d2 = squared_distances(positions);

  std::vector<GpGridScore> scores;
  GpGridScore best{grid.length_scales.front(), grid.noises.front(),
                   -std::numeric_limits<double>::infinity()};
  Eigen::LLT<Matrix> llt;
  for (double l : grid.length_scales) {
    for (double s : grid.noises) {
      double jitter = 0.0;
      const double lml = factor(d2, l, s, llt, jitter) ? lml_from_factor(llt, centred)
                                                      : -std::numeric_limits<double>::infinity();
      scores.push_back({l, s, lml});
      if (lml > best.log_marginal_likelihood) best = scores.back();
    }
  }
  if (!std::isfinite(best.log_marginal_likelihood)) {
    throw std::runtime_error("gp_surrogate: no grid point produced a positive definite covariance");
  }
  GpSurrogate gp(std::move(positions), std::move(values), best.length_scale, best.noise);
  gp.grid_scores_ = std::move(scores);
  return gp;
}

GpSurrogate::GpSurrogate(Matrix positions, Vector values, double length_scale, double noise)
    : positions_(std::move(positions)), length_scale_(length_scale), noise_(noise) {
  if (positions_.rows() != values.size() || positions_.rows() == 0) {
    throw std::invalid_argument("gp_surrogate: size mismatch");
  }
  if (!(length_scale_ > 0.0) || noise_ < 0.0) {
    throw std::invalid_argument("gp_surrogate: invalid hyperparameters");
  }
  mean_ = values.mean();
  centred_ = values.array() - mean_;
  Eigen::LLT<Matrix> llt;
  if (!factor(squared_distances(positions_), length_scale_, noise_, llt, jitter_)) {
    throw std::runtime_error("gp_surrogate: covariance is not positive definite");
  }
  alpha_ = llt.solve(centred_);
  log_marginal_likelihood_ = lml_from_factor(llt, centred_);
}

double GpSurrogate::predict_mean(const Vector& q) const {
  if (q.size() != dim()) throw std::invalid_argument("gp_surrogate: dimension mismatch");
  double m = mean_;
  for (Index i = 0; i < positions_.rows(); ++i) {
    m += alpha_[i] * squared_exponential((positions_.row(i).transpose() - q).squaredNorm(), length_scale_);
  }
  return m;
}

Vector GpSurrogate::gradient_of_mean(const Vector& q) const {
  if (q.size() != dim()) throw std::invalid_argument("gp_surrogate: dimension mismatch");
  Vector g = Vector::Zero(dim());
  const double inv_l2 = 1.0 / (length_scale_ * length_scale_);
  Vector diff(dim());
  for (Index i = 0; i < positions_.rows(); ++i) {
    diff = positions_.row(i).transpose() - q;
    const double k = std::exp(-0.5 * diff.squaredNorm() * inv_l2);
    g.noalias() += (alpha_[i] * k * inv_l2) * diff;
  }
  return g;
}

}  // namespace nnghmc
