#pragma once

#include <nnghmc/common.hpp>
#include <nnghmc/targets.hpp>

#include <functional>
#include <memory>
#include <string>

namespace nnghmc {

class MlpGradientNet;
class GpSurrogate;

enum class CostClass { full_data, surrogate, minibatch };

std::string to_string(CostClass c);

/// Source of (possibly approximate) gradients for the leapfrog integrator.
///
/// `eval` is deterministic for exact and surrogate oracles. The minibatch
/// oracle draws rows from its own RNG stream, which is why `eval` is not
/// const; give each chain its own oracle object.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual Index dim() const = 0;
  virtual Vector eval(const Vector& q) = 0;
  virtual CostClass cost_class() const = 0;
  virtual std::string name() const = 0;
};

/// The target's analytic gradient. Outside the support it returns NaNs so the
/// integrator flags the trajectory as divergent instead of throwing.
class ExactOracle final : public GradientOracle {
 public:
  explicit ExactOracle(const TargetModel& target) : target_(&target) {}
  Index dim() const override { return target_->dim(); }
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return CostClass::full_data; }
  std::string name() const override { return "exact"; }

 private:
  const TargetModel* target_;
};

/// Always returns the zero vector (free-particle dynamics).
class ZeroOracle final : public GradientOracle {
 public:
  explicit ZeroOracle(Index dim) : dim_(dim) {}
  Index dim() const override { return dim_; }
  Vector eval(const Vector&) override { return Vector::Zero(dim_); }
  CostClass cost_class() const override { return CostClass::surrogate; }
  std::string name() const override { return "zero"; }

 private:
  Index dim_;
};

class FunctionOracle final : public GradientOracle {
 public:
  FunctionOracle(Index dim, std::function<Vector(const Vector&)> fn, std::string name = "function",
                 CostClass cost = CostClass::surrogate)
      : dim_(dim), fn_(std::move(fn)), name_(std::move(name)), cost_(cost) {}
  Index dim() const override { return dim_; }
  Vector eval(const Vector& q) override { return fn_(q); }
  CostClass cost_class() const override { return cost_; }
  std::string name() const override { return name_; }

 private:
  Index dim_;
  std::function<Vector(const Vector&)> fn_;
  std::string name_;
  CostClass cost_;
};

class NetOracle final : public GradientOracle {
 public:
  explicit NetOracle(std::shared_ptr<const MlpGradientNet> net);
  Index dim() const override;
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return CostClass::surrogate; }
  std::string name() const override { return "nn"; }
  const MlpGradientNet& net() const { return *net_; }

 private:
  std::shared_ptr<const MlpGradientNet> net_;
};

class GpSurrogateOracle final : public GradientOracle {
 public:
  explicit GpSurrogateOracle(std::shared_ptr<const GpSurrogate> gp);
  Index dim() const override;
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return CostClass::surrogate; }
  std::string name() const override { return "gp_surrogate"; }

 private:
  std::shared_ptr<const GpSurrogate> gp_;
};

/// Unbiased minibatch gradient; rows are drawn without replacement from a
/// dedicated stream. With batch_size >= n it defers to the full gradient.
class MinibatchOracle final : public GradientOracle {
 public:
  MinibatchOracle(const MinibatchTarget& target, Index batch_size, Rng rng);
  Index dim() const override { return target_->dim(); }
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return CostClass::minibatch; }
  std::string name() const override { return "minibatch"; }
  Index batch_size() const { return batch_size_; }

 private:
  const MinibatchTarget* target_;
  Index batch_size_;
  Rng rng_;
  std::vector<Index> rows_;
};

/// Exact gradient plus a smooth, seeded perturbation E(q) with ||E(q)|| <= bound:
/// E_i(q) = bound / sqrt(d) * sin(w_i . q + phi_i).
class PerturbedOracle final : public GradientOracle {
 public:
  PerturbedOracle(std::unique_ptr<GradientOracle> base, double bound, std::uint64_t seed);
  Index dim() const override { return base_->dim(); }
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return base_->cost_class(); }
  std::string name() const override { return "perturbed"; }

  Vector perturbation(const Vector& q) const;
  double bound() const { return bound_; }

 private:
  std::unique_ptr<GradientOracle> base_;
  double bound_;
  Matrix frequencies_;
  Vector phases_;
};

/// Re-targets a trained gradient approximation to a new prior:
/// base(q) - old_prior_grad(q) + new_prior_grad(q), where the prior
/// gradients are gradients of the negative log prior.
class PriorSwapOracle final : public GradientOracle {
 public:
  using PriorGradient = std::function<Vector(const Vector&)>;

  PriorSwapOracle(std::unique_ptr<GradientOracle> base, PriorGradient old_prior_grad,
                  PriorGradient new_prior_grad);
  Index dim() const override { return base_->dim(); }
  Vector eval(const Vector& q) override;
  CostClass cost_class() const override { return base_->cost_class(); }
  std::string name() const override { return "prior_swap"; }

 private:
  std::unique_ptr<GradientOracle> base_;
  PriorGradient old_prior_grad_;
  PriorGradient new_prior_grad_;
};

}  // namespace nnghmc
