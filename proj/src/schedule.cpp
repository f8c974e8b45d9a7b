#include <nnghmc/schedule.hpp>

#include <algorithm>
#include <stdexcept>

namespace nnghmc {

void TrainingSchedule::validate() const {
  if (collect_start < 0) throw std::invalid_argument("schedule: collect_start must be >= 0");
  if (start_iter < 1) throw std::invalid_argument("schedule: start_iter must be >= 1");
  if (start_iter >= end_iter) throw std::invalid_argument("schedule: start_iter must be < end_iter");
  if (check_interval < 1) throw std::invalid_argument("schedule: check_interval must be >= 1");
  if (collect_start >= start_iter) {
    throw std::invalid_argument("schedule: collection must begin before the first check");
  }
  if (acceptance_target > 0.0 && probe_draws < 1) {
    throw std::invalid_argument("schedule: probe_draws must be >= 1");
  }
  if (collect_every < 1) throw std::invalid_argument("schedule: collect_every must be >= 1");
}

TrainingSchedule TrainingSchedule::fixed(long iterations, int collect_every, long collect_start) {
  TrainingSchedule s;
  s.collect_start = collect_start;
  s.start_iter = iterations;
  s.end_iter = iterations + 1;
  s.check_interval = 1;
  s.acceptance_target = 0.0;
  s.probe_draws = 0;
  s.collect_every = collect_every;
  return s;
}

namespace {

double window_acceptance(const ChainRecorder& recorder, long from, long to) {
  const auto& acc = recorder.chain().accepted;
  long n = 0;
  for (long t = from; t < to; ++t) n += acc[static_cast<std::size_t>(t)];
  return to > from ? static_cast<double>(n) / static_cast<double>(to - from) : 0.0;
}

}  // namespace

NnghmcResult run_nnghmc(const TargetModel& target, const HmcConfig& config,
                        const TrainingSchedule& schedule, const NetSpec& net_spec,
                        const TrainConfig& train_config, const Vector& init) {
  config.validate();
  schedule.validate();

  HmcSampler sampler(target, config, init);
  ExactOracle exact(target);
  ChainRecorder recorder(config.n_iterations, target.dim());
  GradientCollector collector;
  NnghmcResult result;

  long leapfrog_calls = 0;
  bool collecting = false;
  const GradientObserver observer = [&](const Vector& q, const Vector& g) {
    if (collecting && leapfrog_calls++ % schedule.collect_every == 0) collector.add(q, g);
  };

  PhaseTimes times;
  std::unique_ptr<NetOracle> net_oracle;
  long next_check = schedule.start_iter;
  long last_check = schedule.collect_start;
  Stopwatch clock;

  for (long t = 0; t < config.n_iterations; ++t) {
    if (!net_oracle && t == next_check && t <= schedule.end_iter) {
      times.collection += clock.seconds();
      clock.reset();

      ScheduleCheck check;
      check.iteration = t;
      check.training_pairs = static_cast<Index>(collector.size());
      check.exact_acceptance = window_acceptance(recorder, std::max(last_check, t - schedule.check_interval), t);
      if (collector.size() > 0) {
        auto net = std::make_shared<MlpGradientNet>(MlpGradientNet::initialize(target.dim(), net_spec));
        const TrainResult tr = train(*net, collector.training_set(), train_config);
        check.final_loss = tr.final_loss;
        auto candidate = std::make_unique<NetOracle>(net);
        if (schedule.acceptance_target <= 0.0) {
          check.adopted = true;
        } else {
          HmcSampler probe = sampler;
          probe.reseed(config.seed, Stream::probe, static_cast<std::uint64_t>(result.checks.size()));
          long accepted = 0;
          for (long i = 0; i < schedule.probe_draws; ++i) accepted += probe.step(*candidate).accepted;
          check.probe_acceptance = static_cast<double>(accepted) / static_cast<double>(schedule.probe_draws);
          check.adopted = check.probe_acceptance >= schedule.acceptance_target * check.exact_acceptance;
          result.probe_evals.oracle_gradient += probe.evals().oracle_gradient - sampler.evals().oracle_gradient;
          result.probe_evals.potential += probe.evals().potential - sampler.evals().potential;
        }
        if (check.adopted) {
          net_oracle = std::move(candidate);
          result.net = net;
          result.adopted = true;
          result.adoption_iteration = t;
          result.training_pairs = check.training_pairs;
          collecting = false;
          collector.clear();
        }
      }
      result.checks.push_back(check);
      last_check = t;
      next_check = t + schedule.check_interval;
      times.training += clock.seconds();
      clock.reset();
    }
    if (!net_oracle) {
      collecting = t >= schedule.collect_start && t < schedule.end_iter;
      if (!collecting && t == schedule.end_iter) collector.clear();
    }

    const StepResult r = net_oracle ? sampler.step(*net_oracle) : sampler.step(exact, observer);
    recorder.record(sampler.position(), r, static_cast<bool>(net_oracle));
  }

  if (net_oracle) {
    times.sampling += clock.seconds();
  } else {
    times.collection += clock.seconds();
  }
  result.chain = recorder.finish();
  result.chain.elapsed = times;
  result.chain.evals = sampler.evals();
  return result;
}

}  // namespace nnghmc
