#pragma once

#include <nnghmc/hmc.hpp>

#include <functional>
#include <string>
#include <vector>

namespace nnghmc {

/// Signature of `leapfrog`; swapped out to check that the suite catches a
/// broken integrator.
using Integrator = std::function<LeapfrogResult(GradientOracle&, Vector, Vector, int, double)>;

Integrator default_integrator();

/// Integrate forward, negate p, integrate back, negate again; returns
/// |(q, p) - (q0, p0)| / max(1, |(q0, p0)|).
double reversibility_error(GradientOracle& oracle, const Vector& q0, const Vector& p0, int steps,
                           double step_size, const Integrator& integrator = default_integrator());

/// Determinant of the central-difference Jacobian of (q, p) -> leapfrog(q, p).
double leapfrog_jacobian_determinant(GradientOracle& oracle, const Vector& q, const Vector& p, int steps,
                                     double step_size, double h = 1e-5,
                                     const Integrator& integrator = default_integrator());

/// Mean |dH| over fixed-time trajectories at step_size and step_size / 2 on a
/// Gaussian target, from `trials` (q, p) drawn from the canonical density.
/// Returns mean(step_size) / mean(step_size / 2).
double energy_error_ratio(const TargetModel& gaussian, const Vector& variances, double duration,
                          double step_size, int trials, std::uint64_t seed);

/// Mean |dH/dt| along fine-step trajectories whose gradient is perturbed by
/// a smooth field of norm <= bound, one entry per bound.
std::vector<double> energy_rate_under_perturbation(const std::vector<double>& bounds, double step_size,
                                                   double duration, int starts, std::uint64_t seed);

struct LocalErrorPoint {
  double dt = 0.0;
  double bound = 0.0;
  double error = 0.0;
  double limit = 0.0;  // dt * bound + C dt^2
};

/// Explicit Euler steps on U = q^2 / 2 in `dim` dimensions with a perturbed
/// gradient, measured against the exact flow. C is the worst unperturbed
/// error / dt^2 over the same points.
std::vector<LocalErrorPoint> local_error_bound(const std::vector<double>& dts, const std::vector<double>& bounds,
                                               Index dim, int points, std::uint64_t seed, double* constant = nullptr);

struct GlobalErrorPoint {
  double time = 0.0;
  double bound = 0.0;
  double error = 0.0;
  double limit = 0.0;  // (e^{T L} - 1) (bound / L + C dt)
};

/// Leapfrog with perturbed gradients on U = k q^2 / 2, compared with the exact
/// flow at several horizons. L is the Lipschitz constant max(1, k) of the
/// Hamiltonian vector field; C is calibrated on the unperturbed run.
std::vector<GlobalErrorPoint> global_error_bound(const std::vector<double>& times, const std::vector<double>& bounds,
                                                 double stiffness, double dt, std::uint64_t seed);

struct PropertyResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  Integrator integrator = default_integrator();
  long chi_square_draws = 200000;
  int chi_square_thin = 20;
};

/// Reversibility, volume preservation, energy scaling, perturbation bounds and
/// exactness under a zero-gradient oracle, with fixed seeds.
std::vector<PropertyResult> run_property_suite(const VerifyOptions& options = {});

}  // namespace nnghmc
