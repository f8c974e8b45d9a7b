#include <nnghmc/sghmc.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnghmc {

void SghmcConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("sghmc: step_size must be positive");
  }
  if (leapfrog_steps < 1) throw std::invalid_argument("sghmc: leapfrog_steps must be >= 1");
  if (minibatch_size < 1) throw std::invalid_argument("sghmc: minibatch_size must be >= 1");
  if (!(friction >= 0.0)) throw std::invalid_argument("sghmc: friction must be non-negative");
  if (n_iterations < 1) throw std::invalid_argument("sghmc: n_iterations must be >= 1");
}

namespace {

struct Trajectory {
  Vector q;
  Vector p;
  bool divergent = false;
};

Trajectory integrate(GradientOracle& oracle, Vector q, Vector p, const SghmcConfig& cfg, Rng& noise_rng,
                     long& gradient_evals) {
  const double eps = cfg.step_size;
  const double damping = eps * cfg.friction;
  const double noise_sd = std::sqrt(2.0 * eps * cfg.friction);
  Trajectory t;
  p -= 0.5 * eps * oracle.eval(q);
  ++gradient_evals;
  for (int i = 1; i <= cfg.leapfrog_steps; ++i) {
    q += eps * p;
    if (!all_finite(q)) {
      t.divergent = true;
      break;
    }
    p -= (i < cfg.leapfrog_steps ? eps : 0.5 * eps) * oracle.eval(q);
    ++gradient_evals;
    if (cfg.friction > 0.0) {
      p -= damping * p;
      p += noise_sd * standard_normal(p.size(), noise_rng);
    }
    if (!all_finite(p)) {
      t.divergent = true;
      break;
    }
  }
  t.q = std::move(q);
  t.p = std::move(p);
  return t;
}

}  // namespace

Chain sghmc_run(const MinibatchTarget& target, const SghmcConfig& config, const Vector& init) {
  config.validate();
  if (init.size() != target.dim()) throw std::invalid_argument("sghmc: initial state has wrong dimension");
  if (!target.in_support(init)) throw std::invalid_argument("sghmc: initial state is outside the support");

  MinibatchOracle oracle(target, config.minibatch_size, make_rng(config.seed, Stream::minibatch));
  Rng momentum_rng = make_rng(config.seed, Stream::momentum);
  Rng uniform_rng = make_rng(config.seed, Stream::metropolis);
  Rng noise_rng = make_rng(config.seed, Stream::minibatch, 1);
  const double divergence_threshold = HmcConfig{}.divergence_threshold;

  ChainRecorder recorder(config.n_iterations, target.dim());
  EvalCounters evals;
  HmcState state{init, 0.0};
  if (config.mh_correction) {
    state.potential = target.potential(state.q);
    ++evals.potential;
  }

  Stopwatch clock;
  for (long it = 0; it < config.n_iterations; ++it) {
    const Vector p0 = standard_normal(target.dim(), momentum_rng);
    const double h0 = state.potential + kinetic_energy(p0);
    Trajectory t = integrate(oracle, state.q, p0, config, noise_rng, evals.oracle_gradient);
    StepResult step;
    step.proposal = t.q;
    if (!config.mh_correction) {
      step.delta_h = std::numeric_limits<double>::quiet_NaN();
      step.divergent = t.divergent;
      if (!t.divergent) {
        step.accepted = true;
        state.q = std::move(t.q);
      }
      recorder.record(state.q, step, true);
      continue;
    }
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(uniform_rng);
    if (t.divergent) {
      step.divergent = true;
      step.delta_h = std::numeric_limits<double>::infinity();
      recorder.record(state.q, step, true);
      continue;
    }
    step.proposal_potential = target.potential(t.q);
    step.potential_evaluated = true;
    ++evals.potential;
    step.delta_h = step.proposal_potential + kinetic_energy(t.p) - h0;
    if (std::isnan(step.delta_h) ||
        (std::isfinite(step.delta_h) && std::abs(step.delta_h) > divergence_threshold)) {
      step.divergent = true;
    } else if (std::isfinite(step.delta_h) && u < std::exp(-step.delta_h)) {
      step.accepted = true;
      state.q = std::move(t.q);
      state.potential = step.proposal_potential;
    }
    recorder.record(state.q, step, true);
  }
  Chain chain = recorder.finish();
  chain.elapsed.sampling = clock.seconds();
  chain.evals = evals;
  return chain;
}

}  // namespace nnghmc
