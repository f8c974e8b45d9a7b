#include <nnghmc/properties.hpp>

#include <nnghmc/diagnostics.hpp>
#include <nnghmc/mlp.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace nnghmc {

namespace {

double joint_norm(const Vector& q, const Vector& p) { return std::sqrt(q.squaredNorm() + p.squaredNorm()); }

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

}  // namespace

Integrator default_integrator() {
  return [](GradientOracle& oracle, Vector q, Vector p, int steps, double eps) {
    return leapfrog(oracle, std::move(q), std::move(p), steps, eps);
  };
}

double reversibility_error(GradientOracle& oracle, const Vector& q0, const Vector& p0, int steps,
                           double step_size, const Integrator& integrator) {
  const LeapfrogResult fwd = integrator(oracle, q0, p0, steps, step_size);
  const LeapfrogResult back = integrator(oracle, fwd.q, -fwd.p, steps, step_size);
  if (fwd.divergent || back.divergent) return std::numeric_limits<double>::infinity();
  return joint_norm(back.q - q0, -back.p - p0) / std::max(1.0, joint_norm(q0, p0));
}

double leapfrog_jacobian_determinant(GradientOracle& oracle, const Vector& q, const Vector& p, int steps,
                                     double step_size, double h, const Integrator& integrator) {
  const Index d = q.size();
  Matrix jac(2 * d, 2 * d);
  auto map = [&](const Vector& z) {
    const LeapfrogResult r = integrator(oracle, z.head(d), z.tail(d), steps, step_size);
    Vector out(2 * d);
    out << r.q, r.p;
    return out;
  };
  Vector z(2 * d);
  z << q, p;
  for (Index j = 0; j < 2 * d; ++j) {
    Vector zp = z;
    Vector zm = z;
    zp[j] += h;
    zm[j] -= h;
    jac.col(j) = (map(zp) - map(zm)) / (2.0 * h);
  }
  return jac.determinant();
}

double energy_error_ratio(const TargetModel& gaussian, const Vector& variances, double duration,
                          double step_size, int trials, std::uint64_t seed) {
  if (variances.size() != gaussian.dim()) throw std::invalid_argument("energy_error_ratio: dimension mismatch");
  ExactOracle oracle(gaussian);
  Rng rng = make_rng(seed, Stream::init);
  double sum_coarse = 0.0;
  double sum_fine = 0.0;
  const int steps = static_cast<int>(std::lround(duration / step_size));
  for (int t = 0; t < trials; ++t) {
    const Vector q = standard_normal(gaussian.dim(), rng).cwiseProduct(variances.cwiseSqrt());
    const Vector p = standard_normal(gaussian.dim(), rng);
    const double h0 = gaussian.potential(q) + kinetic_energy(p);
    const LeapfrogResult coarse = leapfrog(oracle, q, p, steps, step_size);
    const LeapfrogResult fine = leapfrog(oracle, q, p, 2 * steps, 0.5 * step_size);
    sum_coarse += std::abs(gaussian.potential(coarse.q) + kinetic_energy(coarse.p) - h0);
    sum_fine += std::abs(gaussian.potential(fine.q) + kinetic_energy(fine.p) - h0);
  }
  return sum_coarse / sum_fine;
}

std::vector<double> energy_rate_under_perturbation(const std::vector<double>& bounds, double step_size,
                                                   double duration, int starts, std::uint64_t seed) {
  const Vector variances = (Vector(2) << 1.0, 2.0).finished();
  const DiagonalGaussianTarget target(variances);
  const long steps = std::lround(duration / step_size);
  std::vector<double> rates;
  for (double bound : bounds) {
    PerturbedOracle oracle(std::make_unique<ExactOracle>(target), bound, seed);
    Rng rng = make_rng(seed, Stream::init);
    double total = 0.0;
    for (int s = 0; s < starts; ++s) {
      Vector q = standard_normal(2, rng).cwiseProduct(variances.cwiseSqrt());
      Vector p = standard_normal(2, rng);
      double h = target.potential(q) + kinetic_energy(p);
      for (long k = 0; k < steps; ++k) {
        LeapfrogResult r = leapfrog(oracle, std::move(q), std::move(p), 1, step_size);
        q = std::move(r.q);
        p = std::move(r.p);
        const double h_next = target.potential(q) + kinetic_energy(p);
        total += std::abs(h_next - h) / step_size;
        h = h_next;
      }
    }
    rates.push_back(total / static_cast<double>(steps * starts));
  }
  return rates;
}

std::vector<LocalErrorPoint> local_error_bound(const std::vector<double>& dts, const std::vector<double>& bounds,
                                               Index dim, int points, std::uint64_t seed, double* constant) {
  const DiagonalGaussianTarget target(Vector::Ones(dim));
  Rng rng = make_rng(seed, Stream::init);
  std::vector<std::pair<Vector, Vector>> starts;
  for (int i = 0; i < points; ++i) {
    Vector q = standard_normal(dim, rng);
    Vector p = standard_normal(dim, rng);
    starts.emplace_back(std::move(q), std::move(p));
  }
  auto worst_error = [&](GradientOracle& oracle, double dt) {
    double worst = 0.0;
    for (const auto& [q, p] : starts) {
      const Vector q_euler = q + dt * p;
      const Vector p_euler = p - dt * oracle.eval(q);
      const Vector q_flow = q * std::cos(dt) + p * std::sin(dt);
      const Vector p_flow = p * std::cos(dt) - q * std::sin(dt);
      worst = std::max(worst, joint_norm(q_euler - q_flow, p_euler - p_flow));
    }
    return worst;
  };

  ExactOracle exact(target);
  double c = 0.0;
  for (double dt : dts) c = std::max(c, worst_error(exact, dt) / (dt * dt));
  if (constant) *constant = c;

  std::vector<LocalErrorPoint> out;
  for (double bound : bounds) {
    PerturbedOracle oracle(std::make_unique<ExactOracle>(target), bound, seed);
    for (double dt : dts) out.push_back({dt, bound, worst_error(oracle, dt), dt * bound + c * dt * dt});
  }
  return out;
}

std::vector<GlobalErrorPoint> global_error_bound(const std::vector<double>& times, const std::vector<double>& bounds,
                                                 double stiffness, double dt, std::uint64_t seed) {
  if (!(stiffness > 0.0)) throw std::invalid_argument("global_error_bound: stiffness must be positive");
  const Index dim = 2;
  const DiagonalGaussianTarget target(Vector::Constant(dim, 1.0 / stiffness));
  const double omega = std::sqrt(stiffness);
  const double lipschitz = std::max(1.0, stiffness);
  Rng rng = make_rng(seed, Stream::init);
  const Vector q0 = standard_normal(dim, rng);
  const Vector p0 = standard_normal(dim, rng);

  auto error_at = [&](GradientOracle& oracle, double horizon) {
    const int steps = static_cast<int>(std::lround(horizon / dt));
    const LeapfrogResult r = leapfrog(oracle, q0, p0, steps, dt);
    const double t = steps * dt;
    const Vector q_flow = q0 * std::cos(omega * t) + p0 * (std::sin(omega * t) / omega);
    const Vector p_flow = p0 * std::cos(omega * t) - q0 * (omega * std::sin(omega * t));
    return joint_norm(r.q - q_flow, r.p - p_flow);
  };

  ExactOracle exact(target);
  double c = 0.0;
  for (double horizon : times) {
    c = std::max(c, error_at(exact, horizon) / (std::expm1(horizon * lipschitz) * dt));
  }
  std::vector<GlobalErrorPoint> out;
  for (double bound : bounds) {
    PerturbedOracle oracle(std::make_unique<ExactOracle>(target), bound, seed);
    for (double horizon : times) {
      const double growth = std::expm1(horizon * lipschitz);
      out.push_back({horizon, bound, error_at(oracle, horizon), growth * (bound / lipschitz + c * dt)});
    }
  }
  return out;
}

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options) {
  std::vector<PropertyResult> results;
  const std::uint64_t seed = options.seed;
  const Vector variances = (Vector(2) << 1.0, 4.0).finished();
  const DiagonalGaussianTarget gauss2(variances);

  {
    auto net = std::make_shared<const MlpGradientNet>(MlpGradientNet::initialize(2, NetSpec{20, 1, seed}));
    std::vector<std::pair<std::string, std::unique_ptr<GradientOracle>>> oracles;
    oracles.emplace_back("exact", std::make_unique<ExactOracle>(gauss2));
    oracles.emplace_back("nn", std::make_unique<NetOracle>(net));
    oracles.emplace_back("zero", std::make_unique<ZeroOracle>(2));
    oracles.emplace_back("perturbed",
                         std::make_unique<PerturbedOracle>(std::make_unique<ExactOracle>(gauss2), 0.1, seed));
    for (auto& [label, oracle] : oracles) {
      Rng rng = make_rng(seed, Stream::init, 1);
      double worst = 0.0;
      for (int i = 0; i < 20; ++i) {
        const Vector q = standard_normal(2, rng);
        const Vector p = standard_normal(2, rng);
        worst = std::max(worst, reversibility_error(*oracle, q, p, 30, 0.05, options.integrator));
      }
      results.push_back({"reversibility/" + label, worst < 1e-10, worst, fmt("max relative round-trip error %.3g (< 1e-10)", worst)});
    }
  }

  {
    double worst = 0.0;
    for (Index dim : {Index{2}, Index{4}}) {
      auto net = std::make_shared<const MlpGradientNet>(MlpGradientNet::initialize(dim, NetSpec{20, 1, seed + 1}));
      NetOracle oracle(net);
      Rng rng = make_rng(seed, Stream::init, 2);
      for (int i = 0; i < 20; ++i) {
        const Vector q = standard_normal(dim, rng);
        const Vector p = standard_normal(dim, rng);
        const double det = leapfrog_jacobian_determinant(oracle, q, p, 5, 0.1, 1e-5, options.integrator);
        worst = std::max(worst, std::abs(det - 1.0));
      }
    }
    results.push_back({"volume/nn", worst < 1e-6, worst, fmt("max |det - 1| %.3g (< 1e-6)", worst)});
  }

  {
    const Vector v = Vector::LinSpaced(10, 1.0, 4.0);
    const DiagonalGaussianTarget gauss(v);
    const double ratio = energy_error_ratio(gauss, v, 2.0, 0.1, 200, seed);
    results.push_back({"energy_scaling", ratio >= 3.5 && ratio <= 4.5, ratio,
                       fmt("mean |dH| ratio when halving the step %.3f (in [3.5, 4.5])", ratio)});
  }

  {
    const std::vector<double> bounds{1.0, 0.1, 0.01, 0.001};
    const auto rates = energy_rate_under_perturbation(bounds, 1e-4, 1.0, 4, seed);
    bool monotone = true;
    for (std::size_t i = 1; i < rates.size(); ++i) monotone = monotone && rates[i] < rates[i - 1];
    const double slope = (std::log(rates.back()) - std::log(rates.front())) /
                         (std::log(bounds.back()) - std::log(bounds.front()));
    results.push_back({"perturbation_limit", monotone, slope,
                       fmt("|dH/dt| decreasing over bounds 1..1e-3: log-log slope %.3f, smallest rate %.3g", slope,
                           rates.back())});
  }

  {
    double c = 0.0;
    const auto pts = local_error_bound({0.1, 0.03, 0.01, 0.003, 0.001}, {1.0, 0.1, 0.01, 0.001}, 3, 50, seed, &c);
    double worst = 0.0;
    bool ok = true;
    for (const auto& pt : pts) {
      ok = ok && pt.error <= pt.limit * (1.0 + 1e-9);
      worst = std::max(worst, pt.error / pt.limit);
    }
    results.push_back({"local_error_bound", ok, worst, fmt("max error / (dt*bound + C dt^2) %.4f, C = %.4f", worst, c)});
  }

  {
    const auto pts = global_error_bound({0.25, 0.5, 1.0, 2.0}, {1.0, 0.1, 0.01, 0.001}, 2.0, 0.01, seed);
    double worst = 0.0;
    bool ok = true;
    for (const auto& pt : pts) {
      ok = ok && pt.error <= pt.limit * (1.0 + 1e-9);
      worst = std::max(worst, pt.error / pt.limit);
    }
    results.push_back({"global_error_bound", ok, worst, fmt("max error / growth bound %.4f", worst)});
  }

  if (options.chi_square_draws > 0) {
    const DiagonalGaussianTarget normal(Vector::Ones(1));
    ZeroOracle zero(1);
    HmcConfig cfg;
    cfg.leapfrog_steps = 10;
    cfg.step_size = 0.25;
    cfg.n_iterations = options.chi_square_draws;
    cfg.seed = seed;
    const Chain chain = run_chain(normal, zero, cfg, Vector::Zero(1));
    const Index thin = std::max(1, options.chi_square_thin);
    const Index kept = chain.size() / thin;
    Vector x(kept);
    for (Index i = 0; i < kept; ++i) x[i] = chain.draws((i + 1) * thin - 1, 0);
    const ChiSquareResult chi = chi_square_standard_normal(x, 20);
    results.push_back({"exactness/zero_oracle", chi.p_value >= 0.01, chi.p_value,
                       fmt("chi-square p = %.4f on thinned draws (>= 0.01), acceptance %.3f", chi.p_value,
                           chain.acceptance_rate())});
  }
  return results;
}

}  // namespace nnghmc
