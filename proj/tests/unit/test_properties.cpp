#include <doctest.h>

#include <nnghmc/experiment.hpp>
#include <nnghmc/mlp.hpp>
#include <nnghmc/properties.hpp>

#include <memory>
#include <sstream>

using namespace nnghmc;

namespace {

// Leapfrog with the sign of the opening half kick flipped.
LeapfrogResult sign_flipped(GradientOracle& oracle, Vector q, Vector p, int steps, double step_size) {
  LeapfrogResult r;
  p += 0.5 * step_size * oracle.eval(q);
  for (int i = 1; i <= steps; ++i) {
    q += step_size * p;
    p -= (i < steps ? step_size : 0.5 * step_size) * oracle.eval(q);
  }
  r.gradient_evals = steps + 1;
  r.q = q;
  r.p = p;
  return r;
}

// Skips the closing half kick, so the map is no longer symmetric.
LeapfrogResult missing_half_kick(GradientOracle& oracle, Vector q, Vector p, int steps, double step_size) {
  LeapfrogResult r;
  p -= 0.5 * step_size * oracle.eval(q);
  for (int i = 1; i <= steps; ++i) {
    q += step_size * p;
    if (i < steps) p -= step_size * oracle.eval(q);
  }
  r.gradient_evals = steps;
  r.q = q;
  r.p = p;
  return r;
}

const PropertyResult& find(const std::vector<PropertyResult>& results, const std::string& prefix) {
  for (const auto& r : results) {
    if (r.name.rfind(prefix, 0) == 0) return r;
  }
  FAIL("no property named " << prefix);
  return results.front();
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("the full suite passes on the real integrator") {
    const auto results = run_property_suite();
    CHECK(results.size() >= 8);
    for (const auto& r : results) {
      CAPTURE(r.name);
      CAPTURE(r.detail);
      CHECK(r.passed);
    }
  }

  TEST_CASE("reversibility under every oracle") {
    DiagonalGaussianTarget t(Vector::LinSpaced(4, 0.5, 3.0));
    ExactOracle exact(t);
    ZeroOracle zero(4);
    PerturbedOracle perturbed(std::make_unique<ExactOracle>(t), 0.1, 3);
    auto net = std::make_shared<const MlpGradientNet>(MlpGradientNet::initialize(4, NetSpec{16, 2, 5}));
    NetOracle nn(net);
    Rng rng = make_rng(1, Stream::init);
    for (GradientOracle* o : std::vector<GradientOracle*>{&exact, &zero, &perturbed, &nn}) {
      for (int i = 0; i < 10; ++i) {
        const Vector q = standard_normal(4, rng);
        const Vector p = standard_normal(4, rng);
        CAPTURE(o->name());
        CHECK(reversibility_error(*o, q, p, 20, 0.1) < 1e-10);
      }
    }
  }

  TEST_CASE("network leapfrog preserves volume") {
    for (Index d : {2, 4}) {
      auto net = std::make_shared<const MlpGradientNet>(MlpGradientNet::initialize(d, NetSpec{10, 1, 2}));
      NetOracle nn(net);
      Rng rng = make_rng(2, Stream::init);
      for (int i = 0; i < 20; ++i) {
        const double det = leapfrog_jacobian_determinant(nn, standard_normal(d, rng), standard_normal(d, rng), 5, 0.1);
        CHECK(std::abs(det - 1.0) < 1e-6);
      }
    }
  }

  TEST_CASE("energy error is second order") {
    const Vector v = Vector::LinSpaced(5, 1.0, 4.0);
    DiagonalGaussianTarget t(v);
    const double ratio = energy_error_ratio(t, v, 2.0, 0.1, 200, 1);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }

  TEST_CASE("a sign error in the integrator is caught") {
    VerifyOptions opts;
    opts.integrator = sign_flipped;
    opts.chi_square_draws = 20000;
    const auto results = run_property_suite(opts);
    CHECK_FALSE(find(results, "reversibility").passed);

    std::ostringstream out;
    CHECK_FALSE(cmd_verify(out, opts));
    CHECK(out.str().find("FAIL reversibility") != std::string::npos);
  }

  TEST_CASE("a dropped half kick breaks reversibility") {
    VerifyOptions opts;
    opts.integrator = missing_half_kick;
    opts.chi_square_draws = 20000;
    CHECK_FALSE(find(run_property_suite(opts), "reversibility").passed);
  }
}
