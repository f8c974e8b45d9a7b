#pragma once

#include <nnghmc/hmc.hpp>
#include <nnghmc/mlp.hpp>

#include <memory>
#include <vector>

namespace nnghmc {

/// When to collect gradients, when to try a network, and when to give up.
///
/// Exact HMC runs from iteration 0. From `collect_start` on, every
/// `collect_every`-th leapfrog gradient is stored. At `start_iter`,
/// `start_iter + check_interval`, ... up to `end_iter` a fresh network is
/// trained on everything collected so far and probed for `probe_draws`
/// throwaway NN-gradient iterations. It is adopted when the probe acceptance
/// reaches `acceptance_target` times the exact acceptance over the preceding
/// interval. A non-positive `acceptance_target` adopts at the first check
/// without probing.
struct TrainingSchedule {
  long collect_start = 0;
  long start_iter = 400;
  long end_iter = 1000;
  long check_interval = 200;
  double acceptance_target = 0.9;
  long probe_draws = 50;
  int collect_every = 1;

  void validate() const;
  /// Collect for `iterations` exact iterations, then switch unconditionally.
  static TrainingSchedule fixed(long iterations, int collect_every = 1, long collect_start = 0);
};

struct ScheduleCheck {
  long iteration = 0;
  Index training_pairs = 0;
  double final_loss = 0.0;
  double exact_acceptance = 0.0;
  double probe_acceptance = 0.0;
  bool adopted = false;
};

struct NnghmcResult {
  Chain chain;
  bool adopted = false;
  long adoption_iteration = -1;
  std::shared_ptr<const MlpGradientNet> net;
  std::vector<ScheduleCheck> checks;
  Index training_pairs = 0;
  EvalCounters probe_evals;
};

/// Exact HMC with gradient collection, scheduled training and adoption of the
/// network oracle for the rest of the chain. Probe draws never enter the
/// chain: they run on a reseeded copy of the sampler. Without adoption the
/// whole chain is exact HMC.
///
/// Phase times: `collection` covers the exact iterations before adoption,
/// `training` covers fitting and probing, `sampling` the rest.
NnghmcResult run_nnghmc(const TargetModel& target, const HmcConfig& config,
                        const TrainingSchedule& schedule, const NetSpec& net_spec,
                        const TrainConfig& train_config, const Vector& init);

}  // namespace nnghmc
