#include <doctest.h>

#include <nnghmc/gp_surrogate.hpp>
#include <nnghmc/hmc.hpp>
#include <nnghmc/mlp.hpp>
#include <nnghmc/oracles.hpp>

#include "numeric.hpp"

#include <cmath>
#include <memory>

using namespace nnghmc;
using nnghmc::test::central_difference;

namespace {

Matrix uniform_rows(Index n, Index d, std::uint64_t seed, double half_width) {
  Rng rng = make_rng(seed, Stream::data);
  std::uniform_real_distribution<double> u(-half_width, half_width);
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = u(rng);
  }
  return m;
}

Vector half_square_norm(const Matrix& rows) { return 0.5 * rows.rowwise().squaredNorm(); }

}  // namespace

TEST_SUITE("gp_surrogate") {
  TEST_CASE("kernel") {
    CHECK(squared_exponential(0.0, 2.0) == 1.0);
    CHECK(squared_exponential(4.0, 2.0) == doctest::Approx(std::exp(-0.5)));
  }

  TEST_CASE("standard grid") {
    const GpGrid g = GpGrid::standard();
    REQUIRE(g.length_scales.size() == 10);
    REQUIRE(g.noises.size() == 6);
    CHECK(g.length_scales.front() == doctest::Approx(0.1));
    CHECK(g.length_scales.back() == doctest::Approx(100.0));
    CHECK(g.noises.front() == doctest::Approx(1e-6));
    CHECK(g.noises.back() == doctest::Approx(1.0));
    CHECK(g.length_scales[1] / g.length_scales[0] == doctest::Approx(g.length_scales[9] / g.length_scales[8]));
  }

  TEST_CASE("distant points reproduce their own values") {
    Matrix x(2, 2);
    x << 0.0, 0.0, 100.0, 0.0;
    const Vector u = (Vector(2) << 3.0, -1.0).finished();
    const GpSurrogate gp(x, u, 1.0, 1e-8);
    CHECK(gp.predict_mean(x.row(0).transpose()) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(gp.predict_mean(x.row(1).transpose()) == doctest::Approx(-1.0).epsilon(1e-6));
  }

  TEST_CASE("interpolates training values as the noise vanishes") {
    const Matrix x = uniform_rows(30, 2, 1, 2.0);
    const Vector u = half_square_norm(x);
    const GpSurrogate gp(x, u, 1.0, 1e-10);
    for (Index i = 0; i < x.rows(); ++i) {
      CHECK(gp.predict_mean(x.row(i).transpose()) == doctest::Approx(u[i]).epsilon(1e-4));
    }
  }

  TEST_CASE("symmetric pair gives zero gradient on the axis") {
    Matrix x(2, 2);
    x << -1.0, 0.0, 1.0, 0.0;
    const Vector u = Vector::Constant(2, 2.0);
    const GpSurrogate gp(x, u, 1.0, 1e-6);
    const Vector g = gp.gradient_of_mean((Vector(2) << 0.0, 0.7).finished());
    CHECK(std::abs(g[0]) < 1e-14);
  }

  TEST_CASE("held-out fit of a quadratic") {
    const Matrix x = uniform_rows(200, 2, 2, 2.0);
    const GpSurrogate gp = GpSurrogate::fit(x, half_square_norm(x));
    const Matrix test = uniform_rows(100, 2, 3, 1.8);
    const Vector truth = half_square_norm(test);
    double se = 0.0;
    for (Index i = 0; i < test.rows(); ++i) {
      const double e = gp.predict_mean(test.row(i).transpose()) - truth[i];
      se += e * e;
    }
    const double rmse = std::sqrt(se / 100.0);
    const double rms = std::sqrt(truth.squaredNorm() / 100.0);
    CHECK(rmse < 0.05 * rms);
  }

  TEST_CASE("grid search picks the best scored candidate") {
    const Matrix x = uniform_rows(60, 3, 4, 1.0);
    const Vector u = half_square_norm(x);
    const GpSurrogate gp = GpSurrogate::fit(x, u);
    REQUIRE(gp.grid_scores().size() == 60);
    for (const auto& s : gp.grid_scores()) CHECK(gp.log_marginal_likelihood() >= s.log_marginal_likelihood);
    const Vector centred = u.array() - u.mean();
    CHECK(GpSurrogate::log_marginal_likelihood(x, centred, gp.length_scale(), gp.noise()) ==
          doctest::Approx(gp.log_marginal_likelihood()));
    CHECK_THROWS(GpSurrogate::fit(x.topRows(1), u.head(1)));
  }

  TEST_CASE("gradient of the mean matches finite differences") {
    const Matrix x = uniform_rows(40, 3, 5, 1.5);
    const GpSurrogate gp(x, half_square_norm(x).array().sin().matrix(), 0.8, 1e-4);
    Rng rng = make_rng(6, Stream::init);
    for (int rep = 0; rep < 20; ++rep) {
      const Vector q = standard_normal(3, rng);
      const Vector fd = central_difference([&](const Vector& v) { return gp.predict_mean(v); }, q, 1e-5);
      CHECK((gp.gradient_of_mean(q) - fd).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  TEST_CASE("network beats the GP surrogate on a 10-dim gaussian") {
    DiagonalGaussianTarget t(Vector::Ones(10));
    ExactOracle exact(t);
    const Chain c = run_chain(t, exact, HmcConfig{5, 0.1, 1100, 1}, Vector::Zero(10));
    const Matrix x = c.draws.bottomRows(1000);
    Matrix grads(1000, 10);
    Vector u(1000);
    for (Index i = 0; i < 1000; ++i) {
      grads.row(i) = t.gradient(x.row(i).transpose()).transpose();
      u[i] = t.potential(x.row(i).transpose());
    }
    auto net = std::make_shared<MlpGradientNet>(MlpGradientNet::initialize(10, NetSpec{100, 1, 1}));
    TrainConfig tc;
    tc.epochs = 30;
    train(*net, TrainingSet{x, grads}, tc);
    NetOracle nn(net);
    GpSurrogateOracle gp(std::make_shared<GpSurrogate>(GpSurrogate::fit(x, u)));
    const Vector start = x.bottomRows(1).transpose();
    const HmcConfig cfg{5, 0.1, 1000, 2};
    const double nn_acc = run_chain(t, nn, cfg, start).acceptance_rate();
    const double gp_acc = run_chain(t, gp, cfg, start).acceptance_rate();
    CAPTURE(nn_acc);
    CAPTURE(gp_acc);
    CHECK(nn_acc > gp_acc);
    CHECK(nn_acc > 0.85);
  }
}
