#include <nnghmc/hmc.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nnghmc {

void HmcConfig::validate() const {
  if (leapfrog_steps < 1) throw std::invalid_argument("hmc: leapfrog_steps must be >= 1");
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("hmc: step_size must be positive");
  }
  if (n_iterations < 1) throw std::invalid_argument("hmc: n_iterations must be >= 1");
  if (!(divergence_threshold > 0.0)) throw std::invalid_argument("hmc: divergence threshold must be positive");
}

LeapfrogResult leapfrog(GradientOracle& oracle, Vector q, Vector p, int steps, double step_size,
                        const GradientObserver& observer) {
  LeapfrogResult r;
  auto grad_at = [&](const Vector& x) {
    Vector g = oracle.eval(x);
    ++r.gradient_evals;
    if (observer && all_finite(g)) observer(x, g);
    return g;
  };

  Vector g = grad_at(q);
  p -= 0.5 * step_size * g;
  if (!all_finite(p)) r.divergent = true;
  for (int i = 1; i <= steps && !r.divergent; ++i) {
    q += step_size * p;
    if (!all_finite(q)) {
      r.divergent = true;
      break;
    }
    g = grad_at(q);
    p -= (i < steps ? step_size : 0.5 * step_size) * g;
    if (!all_finite(p)) r.divergent = true;
  }
  r.q = std::move(q);
  r.p = std::move(p);
  return r;
}

StepResult hmc_step(const TargetModel& target, GradientOracle& oracle, HmcState& state,
                    const HmcConfig& config, Rng& momentum_rng, Rng& uniform_rng,
                    const GradientObserver& observer) {
  const Vector p0 = standard_normal(target.dim(), momentum_rng);
  const double h0 = state.potential + kinetic_energy(p0);
  LeapfrogResult lf = leapfrog(oracle, state.q, p0, config.leapfrog_steps, config.step_size, observer);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(uniform_rng);

  StepResult out;
  out.gradient_evals = lf.gradient_evals;
  out.proposal = std::move(lf.q);
  if (lf.divergent) {
    out.divergent = true;
    out.delta_h = std::numeric_limits<double>::infinity();
    out.proposal_potential = kInfinitePotential;
    return out;
  }
  out.proposal_potential = target.potential(out.proposal);
  out.potential_evaluated = true;
  out.delta_h = out.proposal_potential + kinetic_energy(lf.p) - h0;
  if (std::isnan(out.delta_h) ||
      (std::isfinite(out.delta_h) && std::abs(out.delta_h) > config.divergence_threshold)) {
    out.divergent = true;
    return out;
  }
  if (!std::isfinite(out.delta_h)) return out;  // out of support
  if (u < std::exp(-out.delta_h)) {
    out.accepted = true;
    state.q = out.proposal;
    state.potential = out.proposal_potential;
  }
  return out;
}

// ------------------------------------------------------------------ chain

double Chain::acceptance_rate() const {
  if (accepted.empty()) return std::numeric_limits<double>::quiet_NaN();
  long n = 0;
  for (auto a : accepted) n += a;
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

double Chain::acceptance_rate(bool surrogate_phase) const {
  long n = 0;
  long total = 0;
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    const bool flagged = i < surrogate.size() && surrogate[i] != 0;
    if (flagged != surrogate_phase) continue;
    ++total;
    n += accepted[i];
  }
  if (total == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(n) / static_cast<double>(total);
}

double Chain::sampling_acceptance() const {
  const double s = acceptance_rate(true);
  return std::isnan(s) ? acceptance_rate() : s;
}

ChainRecorder::ChainRecorder(Index n_iterations, Index dim) {
  chain_.draws.resize(n_iterations, dim);
  chain_.accepted.reserve(static_cast<std::size_t>(n_iterations));
  chain_.delta_h.reserve(static_cast<std::size_t>(n_iterations));
  chain_.surrogate.reserve(static_cast<std::size_t>(n_iterations));
}

void ChainRecorder::record(const Vector& q, const StepResult& step, bool surrogate) {
  if (next_ >= chain_.draws.rows()) throw std::out_of_range("ChainRecorder: chain is full");
  chain_.draws.row(next_++) = q.transpose();
  chain_.accepted.push_back(step.accepted ? 1 : 0);
  chain_.delta_h.push_back(step.delta_h);
  chain_.surrogate.push_back(surrogate ? 1 : 0);
}

Chain ChainRecorder::finish() {
  if (next_ < chain_.draws.rows()) chain_.draws.conservativeResize(next_, Eigen::NoChange);
  return std::move(chain_);
}

// ---------------------------------------------------------------- sampler

HmcSampler::HmcSampler(const TargetModel& target, HmcConfig config, Vector init)
    : target_(&target),
      config_(config),
      momentum_rng_(make_rng(config.seed, Stream::momentum)),
      uniform_rng_(make_rng(config.seed, Stream::metropolis)) {
  config_.validate();
  if (init.size() != target.dim()) throw std::invalid_argument("hmc: initial state has wrong dimension");
  if (!target.in_support(init)) throw std::invalid_argument("hmc: initial state is outside the support");
  state_.q = std::move(init);
  state_.potential = target.potential(state_.q);
  ++evals_.potential;
}

StepResult HmcSampler::step(GradientOracle& oracle, const GradientObserver& observer) {
  if (oracle.dim() != target_->dim()) throw std::invalid_argument("hmc: oracle dimension mismatch");
  StepResult r = hmc_step(*target_, oracle, state_, config_, momentum_rng_, uniform_rng_, observer);
  if (oracle.cost_class() == CostClass::full_data) {
    evals_.exact_gradient += r.gradient_evals;
  } else {
    evals_.oracle_gradient += r.gradient_evals;
  }
  if (r.potential_evaluated) ++evals_.potential;
  return r;
}

void HmcSampler::reseed(std::uint64_t seed, Stream family, std::uint64_t salt) {
  momentum_rng_ = make_rng(seed, family, 2 * salt);
  uniform_rng_ = make_rng(seed, family, 2 * salt + 1);
}

Chain run_chain(const TargetModel& target, GradientOracle& oracle, const HmcConfig& config,
                const Vector& init, const GradientObserver& observer) {
  HmcSampler sampler(target, config, init);
  ChainRecorder recorder(config.n_iterations, target.dim());
  const bool surrogate = oracle.cost_class() != CostClass::full_data;
  Stopwatch clock;
  for (long t = 0; t < config.n_iterations; ++t) {
    const StepResult r = sampler.step(oracle, observer);
    recorder.record(sampler.position(), r, surrogate);
  }
  Chain chain = recorder.finish();
  chain.elapsed.sampling = clock.seconds();
  chain.evals = sampler.evals();
  return chain;
}

}  // namespace nnghmc
