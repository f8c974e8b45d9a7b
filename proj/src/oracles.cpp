#include <nnghmc/oracles.hpp>

#include <nnghmc/gp_surrogate.hpp>
#include <nnghmc/mlp.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nnghmc {

std::string to_string(CostClass c) {
  switch (c) {
    case CostClass::full_data:
      return "full_data";
    case CostClass::surrogate:
      return "surrogate";
    case CostClass::minibatch:
      return "minibatch";
  }
  return "unknown";
}

Vector ExactOracle::eval(const Vector& q) {
  if (!target_->in_support(q)) {
    return Vector::Constant(target_->dim(), std::numeric_limits<double>::quiet_NaN());
  }
  return target_->gradient(q);
}

NetOracle::NetOracle(std::shared_ptr<const MlpGradientNet> net) : net_(std::move(net)) {
  if (!net_) throw std::invalid_argument("NetOracle: null network");
}

Index NetOracle::dim() const { return net_->dim(); }

Vector NetOracle::eval(const Vector& q) { return net_->forward(q); }

GpSurrogateOracle::GpSurrogateOracle(std::shared_ptr<const GpSurrogate> gp) : gp_(std::move(gp)) {
  if (!gp_) throw std::invalid_argument("GpSurrogateOracle: null surrogate");
}

Index GpSurrogateOracle::dim() const { return gp_->dim(); }

Vector GpSurrogateOracle::eval(const Vector& q) { return gp_->gradient_of_mean(q); }

MinibatchOracle::MinibatchOracle(const MinibatchTarget& target, Index batch_size, Rng rng)
    : target_(&target), batch_size_(batch_size), rng_(std::move(rng)) {
  if (batch_size_ < 1) throw std::invalid_argument("MinibatchOracle: batch size must be >= 1");
  rows_.resize(static_cast<std::size_t>(target_->n_observations()));
  std::iota(rows_.begin(), rows_.end(), Index{0});
}

Vector MinibatchOracle::eval(const Vector& q) {
  const Index n = target_->n_observations();
  if (batch_size_ >= n) return target_->gradient(q);
  // Partial Fisher-Yates: the first batch_size_ entries become the sample.
  for (Index i = 0; i < batch_size_; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(rows_[static_cast<std::size_t>(i)], rows_[static_cast<std::size_t>(pick(rng_))]);
  }
  return target_->minibatch_gradient(
      q, std::span<const Index>(rows_.data(), static_cast<std::size_t>(batch_size_)));
}

PerturbedOracle::PerturbedOracle(std::unique_ptr<GradientOracle> base, double bound,
                                 std::uint64_t seed)
    : base_(std::move(base)), bound_(bound) {
  if (!base_) throw std::invalid_argument("PerturbedOracle: null base oracle");
  if (bound_ < 0.0) throw std::invalid_argument("PerturbedOracle: bound must be non-negative");
  const Index d = base_->dim();
  Rng rng = make_rng(seed, Stream::perturbation);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * 3.14159265358979323846);
  frequencies_.resize(d, d);
  phases_.resize(d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) frequencies_(i, j) = normal(rng);
    phases_[i] = phase(rng);
  }
}

Vector PerturbedOracle::perturbation(const Vector& q) const {
  if (bound_ == 0.0) return Vector::Zero(q.size());
  const double amp = bound_ / std::sqrt(static_cast<double>(q.size()));
  Vector e = frequencies_ * q + phases_;
  return amp * e.array().sin().matrix();
}

Vector PerturbedOracle::eval(const Vector& q) { return base_->eval(q) + perturbation(q); }

PriorSwapOracle::PriorSwapOracle(std::unique_ptr<GradientOracle> base, PriorGradient old_prior_grad,
                                 PriorGradient new_prior_grad)
    : base_(std::move(base)),
      old_prior_grad_(std::move(old_prior_grad)),
      new_prior_grad_(std::move(new_prior_grad)) {
  if (!base_ || !old_prior_grad_ || !new_prior_grad_) {
    throw std::invalid_argument("PriorSwapOracle: missing component");
  }
}

Vector PriorSwapOracle::eval(const Vector& q) {
  return base_->eval(q) - old_prior_grad_(q) + new_prior_grad_(q);
}

}  // namespace nnghmc
