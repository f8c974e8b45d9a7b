#pragma once

#include <nnghmc/hmc.hpp>
#include <nnghmc/targets.hpp>

namespace nnghmc {

struct SghmcConfig {
  double step_size = 0.001;
  int leapfrog_steps = 10;
  Index minibatch_size = 500;
  // Per-step momentum damping is step_size * friction * p, with injected
  // noise of variance 2 * step_size * friction.
  double friction = 0.1;
  bool mh_correction = true;
  long n_iterations = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Stochastic-gradient HMC. Each iteration draws fresh momentum and runs
/// `leapfrog_steps` friction-damped leapfrog steps on minibatch gradients.
/// With `mh_correction` the endpoint is accepted by an exact-potential
/// Metropolis test; otherwise it is always taken unless the state diverged.
///
/// Momentum and Metropolis draws use the same streams as HmcSampler, so with
/// zero friction and a full batch the chain equals exact-gradient HMC.
Chain sghmc_run(const MinibatchTarget& target, const SghmcConfig& config, const Vector& init);

}  // namespace nnghmc
