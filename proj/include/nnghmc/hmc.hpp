#pragma once

#include <nnghmc/common.hpp>
#include <nnghmc/oracles.hpp>
#include <nnghmc/targets.hpp>

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace nnghmc {

struct HmcConfig {
  int leapfrog_steps = 10;
  double step_size = 0.1;
  long n_iterations = 1000;
  std::uint64_t seed = 1;
  // |dH| beyond this, or any non-finite state, rejects the trajectory.
  double divergence_threshold = 1000.0;

  void validate() const;
};

/// Called with every (q, oracle(q)) pair the integrator evaluates.
using GradientObserver = std::function<void(const Vector& q, const Vector& grad)>;

struct LeapfrogResult {
  Vector q;
  Vector p;
  bool divergent = false;
  int gradient_evals = 0;
};

/// Half momentum step, `steps` alternating position/momentum steps, final
/// half momentum step. Exactly steps + 1 oracle calls unless the state turns
/// non-finite, in which case the trajectory stops and is flagged divergent.
LeapfrogResult leapfrog(GradientOracle& oracle, Vector q, Vector p, int steps, double step_size,
                        const GradientObserver& observer = {});

inline double kinetic_energy(const Vector& p) { return 0.5 * p.squaredNorm(); }

struct HmcState {
  Vector q;
  double potential = 0.0;
};

struct StepResult {
  bool accepted = false;
  bool divergent = false;
  double delta_h = 0.0;  // H(end) - H(start); +inf for out-of-support proposals
  Vector proposal;
  double proposal_potential = 0.0;
  int gradient_evals = 0;
  bool potential_evaluated = false;
};

/// One HMC transition with gradients from `oracle` and a Metropolis test on
/// the exact Hamiltonian. `state.potential` must hold U(state.q); it is reused
/// as the starting energy so each call evaluates U exactly once.
StepResult hmc_step(const TargetModel& target, GradientOracle& oracle, HmcState& state,
                    const HmcConfig& config, Rng& momentum_rng, Rng& uniform_rng,
                    const GradientObserver& observer = {});

struct PhaseTimes {
  double collection = 0.0;
  double training = 0.0;
  double sampling = 0.0;

  double total() const { return collection + training + sampling; }
};

struct EvalCounters {
  long exact_gradient = 0;
  long oracle_gradient = 0;  // surrogate or minibatch gradients
  long potential = 0;
};

struct Chain {
  Matrix draws;                    // iterations x dim
  std::vector<std::uint8_t> accepted;
  std::vector<double> delta_h;
  std::vector<std::uint8_t> surrogate;  // 1 where the step used a non-exact oracle; missing entries count as 0
  PhaseTimes elapsed;
  EvalCounters evals;

  Index size() const { return draws.rows(); }
  Index dim() const { return draws.cols(); }
  double acceptance_rate() const;
  /// Acceptance over exact (false) or surrogate (true) iterations; NaN if none.
  double acceptance_rate(bool surrogate_phase) const;
  /// Surrogate-phase acceptance when present, otherwise overall.
  double sampling_acceptance() const;
};

/// Appends iterations to a pre-sized chain.
class ChainRecorder {
 public:
  ChainRecorder(Index n_iterations, Index dim);
  void record(const Vector& q, const StepResult& step, bool surrogate);
  Index recorded() const { return next_; }
  Chain& chain() { return chain_; }
  const Chain& chain() const { return chain_; }
  Chain finish();

 private:
  Chain chain_;
  Index next_ = 0;
};

/// Stateful single-chain sampler. Copies share nothing mutable.
class HmcSampler {
 public:
  HmcSampler(const TargetModel& target, HmcConfig config, Vector init);

  StepResult step(GradientOracle& oracle, const GradientObserver& observer = {});

  const Vector& position() const { return state_.q; }
  double potential() const { return state_.potential; }
  const HmcConfig& config() const { return config_; }
  const EvalCounters& evals() const { return evals_; }
  const TargetModel& target() const { return *target_; }

  /// Replace both RNG streams, e.g. for throwaway probe draws.
  void reseed(std::uint64_t seed, Stream family, std::uint64_t salt);

 private:
  const TargetModel* target_;
  HmcConfig config_;
  HmcState state_;
  Rng momentum_rng_;
  Rng uniform_rng_;
  EvalCounters evals_;
};

Chain run_chain(const TargetModel& target, GradientOracle& oracle, const HmcConfig& config,
                const Vector& init, const GradientObserver& observer = {});

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void reset() { start_ = std::chrono::steady_clock::now(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace nnghmc
