#include <doctest.h>

#include <nnghmc/data_io.hpp>
#include <nnghmc/targets.hpp>

#include "numeric.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

using namespace nnghmc;
using nnghmc::test::central_difference;
using nnghmc::test::relative_error;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

double banana_reference(double a, double b, double c, double x1, double x2) {
  const double r = c * x2 + b * a * a * x1 * x1 - 100.0 * b;
  return a * a * x1 * x1 / 200.0 + 0.5 * r * r;
}

void check_gradient(const TargetModel& t, const Vector& q, double tol = 1e-5) {
  const Vector fd = central_difference([&](const Vector& x) { return t.potential(x); }, q, 1e-5);
  const Vector g = t.gradient(q);
  CAPTURE(q.transpose());
  CAPTURE(g.transpose());
  CAPTURE(fd.transpose());
  CHECK(relative_error(g, fd) < tol);
}

}  // namespace

TEST_SUITE("targets") {
  TEST_CASE("banana closed form and stationary point") {
    BananaTarget t(1.0, 0.1, 1.0);
    CHECK(t.dim() == 2);
    CHECK(t.potential(vec({0.0, 10.0})) == doctest::Approx(0.0));
    CHECK(t.gradient(vec({0.0, 10.0})).norm() == doctest::Approx(0.0));
    CHECK(t.potential(vec({1.5, -2.0})) == doctest::Approx(banana_reference(1.0, 0.1, 1.0, 1.5, -2.0)));

    BananaTarget wide(10.0, 0.01, 17.5);
    CHECK(wide.potential(vec({0.3, 1.2})) == doctest::Approx(banana_reference(10.0, 0.01, 17.5, 0.3, 1.2)));
    CHECK(wide.gradient(vec({0.0, 100.0 * 0.01 / 17.5})).norm() < 1e-12);
  }

  TEST_CASE("banana density integrates to a finite constant") {
    BananaTarget t(1.0, 0.1, 1.0);
    double mass = 0.0;
    double outer = 0.0;
    const double h = 0.25;
    for (double x1 = -80.0; x1 <= 80.0; x1 += h) {
      for (double x2 = -700.0; x2 <= 40.0; x2 += h) {
        const double w = std::exp(-t.potential(vec({x1, x2}))) * h * h;
        mass += w;
        if (std::abs(x1) > 60.0) outer += w;
      }
    }
    CHECK(std::isfinite(mass));
    CHECK(mass > 0.0);
    CHECK(outer / mass < 1e-6);
  }

  TEST_CASE("diagonal gaussian") {
    DiagonalGaussianTarget t(vec({1.0, 4.0}));
    CHECK(t.potential(vec({0.0, 0.0})) == 0.0);
    CHECK(t.gradient(vec({0.0, 0.0})).norm() == 0.0);
    const Vector g = t.gradient(vec({2.0, 2.0}));
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(0.5));
    CHECK(t.potential(vec({2.0, 2.0})) == doctest::Approx(0.5 * (4.0 + 1.0)));
    CHECK_THROWS_AS(DiagonalGaussianTarget(vec({1.0, -1.0})), std::invalid_argument);
    CHECK_THROWS_AS(t.potential(vec({1.0})), std::invalid_argument);
  }

  TEST_CASE("ill-conditioned variances") {
    const Vector v = ill_conditioned_variances(30, 1);
    CHECK(v.size() == 30);
    CHECK(v.minCoeff() == 0.1);
    CHECK(v.maxCoeff() == 1000.0);
    for (Index i = 1; i < 29; ++i) {
      CHECK(v[i] >= 1.0);
      CHECK(v[i] <= 100.0);
    }
    CHECK(ill_conditioned_variances(30, 1) == v);
  }

  TEST_CASE("finite-difference gradients at random points") {
    Rng rng = make_rng(11, Stream::init);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    BananaTarget banana(1.0, 0.1, 1.0);
    DiagonalGaussianTarget gaussian(ill_conditioned_variances(30, 2));
    auto logistic = gen_logistic(20, 3, 5);
    LogisticRegressionTarget lr(logistic.data.x, logistic.data.y, CoefficientPrior{});
    CoefficientPrior laplace{CoefficientPrior::Kind::laplace, 2.0};
    LogisticRegressionTarget lr_laplace(logistic.data.x, logistic.data.y, laplace);
    GarchTarget garch(gen_garch(300, vec({0.1, 0.2, 0.1}), vec({0.4}), 3), 2, 1);
    auto gp_data = gen_gp_regression(10, 2, 4);
    GpRegressionTarget gp(gp_data.x, gp_data.y);

    for (int rep = 0; rep < 100; ++rep) {
      check_gradient(banana, vec({3.0 * normal(rng), 10.0 + 3.0 * normal(rng)}));
      Vector qg(30);
      for (Index i = 0; i < 30; ++i) qg[i] = normal(rng);
      check_gradient(gaussian, qg);
      Vector ql(3);
      for (Index i = 0; i < 3; ++i) ql[i] = normal(rng);
      check_gradient(lr, ql);
      // Away from the kink at zero the Laplace prior is differentiable.
      if ((ql.array().abs() > 1e-3).all()) check_gradient(lr_laplace, ql);
      Vector qa(4);
      qa << 0.05 + 0.2 * unif(rng), 0.3 * unif(rng), 0.3 * unif(rng), 0.35 * unif(rng);
      check_gradient(garch, qa);
      if (rep < 20) check_gradient(gp, vec({0.5 * normal(rng), -1.0 + 0.5 * normal(rng)}));
    }
  }

  TEST_CASE("logistic gradient matches the closed form") {
    auto d = gen_logistic(20, 3, 9);
    LogisticRegressionTarget t(d.data.x, d.data.y, CoefficientPrior{CoefficientPrior::Kind::gaussian, 4.0});
    const Vector beta = vec({0.3, -0.7, 1.1});
    Vector expected = beta / 4.0;
    for (Index i = 0; i < 20; ++i) {
      const double eta = d.data.x.row(i).dot(beta);
      expected -= d.data.x.row(i).transpose() * (d.data.y[i] - 1.0 / (1.0 + std::exp(-eta)));
    }
    CHECK((t.gradient(beta) - expected).norm() < 1e-12);
    CHECK(std::isfinite(t.potential(vec({500.0, -500.0, 500.0}))));
    CHECK(t.gradient(vec({500.0, -500.0, 500.0})).allFinite());
  }

  TEST_CASE("logistic minibatch gradient") {
    auto d = gen_logistic(200, 4, 3);
    LogisticRegressionTarget t(d.data.x, d.data.y, CoefficientPrior{});
    const Vector beta = vec({0.2, -0.1, 0.4, 0.0});
    std::vector<Index> all(200);
    std::iota(all.begin(), all.end(), Index{0});
    CHECK((t.minibatch_gradient(beta, all) - t.gradient(beta)).norm() < 1e-10);

    // Averaging over the disjoint halves recovers the full gradient.
    std::vector<Index> first(all.begin(), all.begin() + 100);
    std::vector<Index> second(all.begin() + 100, all.end());
    const Vector avg = 0.5 * (t.minibatch_gradient(beta, first) + t.minibatch_gradient(beta, second));
    CHECK((avg - t.gradient(beta)).norm() < 1e-10);
    CHECK_THROWS_AS(t.minibatch_gradient(beta, std::vector<Index>{}), std::invalid_argument);
  }

  TEST_CASE("garch support and infinite potential") {
    GarchTarget t(gen_garch(200, vec({0.1, 0.2, 0.1}), vec({0.4}), 1), 2, 1);
    CHECK(t.dim() == 4);
    CHECK(t.in_support(vec({0.1, 0.2, 0.1, 0.4})));
    CHECK_FALSE(t.in_support(vec({0.0, 0.2, 0.1, 0.4})));
    CHECK_FALSE(t.in_support(vec({0.1, -0.01, 0.1, 0.4})));
    CHECK_FALSE(t.in_support(vec({0.1, 0.5, 0.2, 0.3})));
    CHECK(t.potential(vec({0.1, 0.5, 0.2, 0.3})) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(t.gradient(vec({0.1, 0.5, 0.2, 0.3})), std::domain_error);
    // Continuity inside the region.
    const double u0 = t.potential(vec({0.1, 0.2, 0.1, 0.4}));
    const double u1 = t.potential(vec({0.1 + 1e-9, 0.2, 0.1, 0.4}));
    CHECK(std::abs(u1 - u0) < 1e-4);
  }

  TEST_CASE("garch recursion by hand") {
    Vector y(4);
    y << 1.0, 1.0, 0.5, -0.5;
    GarchTarget t(y, 1, 1);
    const Vector s2 = t.variance_recursion(vec({0.1, 0.2, 0.3}));
    const double pre = t.presample_variance();
    CHECK(s2[0] == pre);
    CHECK(s2[1] == doctest::Approx(0.1 + 0.2 * 1.0 + 0.3 * pre));
    // y_{t-1} = 1 and a pre-sample variance of exactly 1.
    Vector unit_y(4);
    unit_y << 1.0, -1.0, std::sqrt(0.5), -std::sqrt(0.5);
    GarchTarget unit(unit_y, 1, 1);
    CHECK(unit.presample_variance() == doctest::Approx(1.0));
    CHECK(unit.variance_recursion(vec({0.1, 0.2, 0.3}))[1] == doctest::Approx(0.6));

    GarchTarget flat(gen_garch(50, vec({0.3, 0.0}), vec({0.0}), 2), 1, 1);
    const Vector s = flat.variance_recursion(vec({0.3, 0.0, 0.0}));
    for (Index i = 1; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(0.3));
  }

  TEST_CASE("garch recursion and potential against a literal transcription") {
    const Vector y = gen_garch(100, vec({0.1, 0.2, 0.1}), vec({0.3}), 1);
    GarchTarget t(y, 2, 1, 10.0);
    const Vector q = vec({0.1, 0.2, 0.1, 0.3});

    const double mean = y.mean();
    double var = 0.0;
    for (Index i = 0; i < y.size(); ++i) var += (y[i] - mean) * (y[i] - mean);
    var /= static_cast<double>(y.size() - 1);
    std::vector<double> sigma2(100, var);
    for (int s = 2; s < 100; ++s) {
      sigma2[s] = q[0] + q[1] * y[s - 1] * y[s - 1] + q[2] * y[s - 2] * y[s - 2] + q[3] * sigma2[s - 1];
    }
    const Vector s2 = t.variance_recursion(q);
    for (int s = 0; s < 100; ++s) CHECK(s2[s] == doctest::Approx(sigma2[s]).epsilon(1e-14));

    // Product-of-normal-densities oracle, compared through differences so the
    // dropped constants cancel.
    auto density_oracle = [&](const Vector& p) {
      std::vector<double> v(100, var);
      double nll = 0.0;
      for (int s = 2; s < 100; ++s) {
        v[s] = p[0] + p[1] * y[s - 1] * y[s - 1] + p[2] * y[s - 2] * y[s - 2] + p[3] * v[s - 1];
        const double dens = std::exp(-0.5 * y[s] * y[s] / v[s]) / std::sqrt(2.0 * std::numbers::pi * v[s]);
        nll -= std::log(dens);
      }
      for (Index j = 0; j < 4; ++j) nll -= std::log(std::exp(-0.5 * p[j] * p[j] / 100.0));
      return nll;
    };
    const Vector q2 = vec({0.15, 0.1, 0.05, 0.5});
    CHECK(t.potential(q) - t.potential(q2) == doctest::Approx(density_oracle(q) - density_oracle(q2)).epsilon(1e-10));
  }

  TEST_CASE("matern 1.5 closed form") {
    CHECK(matern15(0.0, 2.0) == 1.0);
    CHECK(matern15(2.0, 2.0) == doctest::Approx((1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0))));
    CHECK(matern15(0.7, 1.3) == doctest::Approx((1.0 + std::sqrt(3.0) * 0.7 / 1.3) * std::exp(-std::sqrt(3.0) * 0.7 / 1.3)));
  }

  TEST_CASE("gp regression potential") {
    Matrix x(1, 1);
    x << 0.0;
    Vector y(1);
    y << 0.0;
    GpRegressionTarget single(x, y);
    CHECK(single.data_potential(1.0, 0.0) == doctest::Approx(0.0));
    const Vector q = vec({0.4, -0.3});
    CHECK(single.potential(q) == doctest::Approx(single.data_potential(std::exp(0.4), std::exp(-0.3)) +
                                                 single.neg_log_prior(q)));

    auto data = gen_gp_regression(10, 3, 2);
    GpRegressionTarget t(data.x, data.y);
    check_gradient(t, vec({0.0, 0.0}));

    // Dense reference: 1/2 y^T C^-1 y + 1/2 log det C.
    const double l = 1.7;
    const double noise = 0.2;
    Matrix c(10, 10);
    for (Index i = 0; i < 10; ++i) {
      for (Index j = 0; j < 10; ++j) c(i, j) = matern15((data.x.row(i) - data.x.row(j)).norm(), l);
    }
    c.diagonal().array() += noise;
    const double expected = 0.5 * data.y.dot(c.inverse() * data.y) + 0.5 * std::log(c.determinant());
    CHECK(t.data_potential(l, noise) == doctest::Approx(expected).epsilon(1e-10));

    // Row order does not matter.
    Matrix xr = data.x.colwise().reverse();
    Vector yr = data.y.reverse();
    GpRegressionTarget reversed(xr, yr);
    CHECK(reversed.potential(q) == doctest::Approx(t.potential(q)).epsilon(1e-12));
  }
}
