#include <doctest.h>

#include <nnghmc/data_io.hpp>
#include <nnghmc/diagnostics.hpp>
#include <nnghmc/hmc.hpp>
#include <nnghmc/targets.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace nnghmc;

namespace {

std::string fixture(const std::string& name) { return std::string(NNGHMC_TEST_DATA) + "/" + name; }

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("nnghmc_" + name);
}

double quantile(Vector x, double p) {
  std::sort(x.data(), x.data() + x.size());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<Index>(std::floor(pos));
  const Index hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace

TEST_SUITE("data_io") {
  TEST_CASE("logistic generator with zero coefficients is a fair coin") {
    const LogisticData d = gen_logistic(10000, 1, 3, Vector::Zero(1));
    const double rate = d.data.y.mean();
    CHECK(rate >= 0.45);
    CHECK(rate <= 0.55);
    CHECK(d.beta.norm() == 0.0);
    CHECK(d.data.provenance.at("generator") == "logistic");
  }

  TEST_CASE("logistic generator shape and determinism") {
    const LogisticData a = gen_logistic(2000, 5, 7);
    const LogisticData b = gen_logistic(2000, 5, 7);
    const LogisticData c = gen_logistic(2000, 5, 8);
    CHECK(a.data.x.rows() == 2000);
    CHECK(a.data.x.cols() == 5);
    CHECK(a.data.x == b.data.x);
    CHECK(a.data.y == b.data.y);
    CHECK(a.beta == b.beta);
    CHECK(a.data.x != c.data.x);
    CHECK(a.beta.cwiseAbs().maxCoeff() <= 1.0);
    for (Index i = 0; i < a.data.y.size(); ++i) CHECK((a.data.y[i] == 0.0 || a.data.y[i] == 1.0));
    CHECK(std::abs(a.data.x.mean()) < 0.05);
    CHECK_THROWS_AS(gen_logistic(0, 2, 1), std::invalid_argument);
  }

  TEST_CASE("logistic maximum a posteriori recovers the true coefficients") {
    const LogisticData d = gen_logistic(5000, 3, 11);
    LogisticRegressionTarget t(d.data.x, d.data.y, CoefficientPrior{});
    // Newton iterations on the potential with the analytic Hessian.
    Vector beta = Vector::Zero(3);
    Matrix hessian;
    for (int it = 0; it < 30; ++it) {
      hessian = Matrix::Identity(3, 3) / 10.0;
      for (Index i = 0; i < d.data.x.rows(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-d.data.x.row(i).dot(beta)));
        hessian += p * (1.0 - p) * d.data.x.row(i).transpose() * d.data.x.row(i);
      }
      beta -= hessian.ldlt().solve(t.gradient(beta));
    }
    CHECK(t.gradient(beta).norm() < 1e-8);
    const Vector sd = hessian.inverse().diagonal().cwiseSqrt();
    for (Index j = 0; j < 3; ++j) {
      CAPTURE(j);
      CHECK(std::abs(beta[j] - d.beta[j]) < 3.0 * sd[j]);
    }
  }

  TEST_CASE("garch generator") {
    const Vector iid = gen_garch(20000, vec({0.3, 0.0}), vec({0.0}), 4);
    const double var = iid.squaredNorm() / static_cast<double>(iid.size());
    CHECK(var == doctest::Approx(0.3).epsilon(0.03));
    CHECK(std::abs(iid.mean()) < 0.02);
    CHECK(gen_garch(100, vec({0.1, 0.2, 0.1}), vec({0.4}), 1) == gen_garch(100, vec({0.1, 0.2, 0.1}), vec({0.4}), 1));
    CHECK(gen_garch(100, vec({0.1, 0.2, 0.1}), vec({0.4}), 1) != gen_garch(100, vec({0.1, 0.2, 0.1}), vec({0.4}), 2));
    CHECK_THROWS_AS(gen_garch(100, vec({0.1, 0.6}), vec({0.5}), 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_garch(100, vec({0.0, 0.1}), vec({0.1}), 1), std::invalid_argument);
  }

  TEST_CASE("garch posterior covers the true parameters") {
    const Vector truth = vec({0.1, 0.2, 0.1, 0.4});
    GarchTarget t(gen_garch(1000, truth.head(3), truth.tail(1), 1), 2, 1);
    ExactOracle oracle(t);
    const Chain c = run_chain(t, oracle, HmcConfig{15, 0.002, 6000, 1}, vec({0.1, 0.1, 0.1, 0.3}));
    const Matrix kept = c.draws.bottomRows(c.size() - c.size() / 10);
    for (Index j = 0; j < 4; ++j) {
      const double lo = quantile(kept.col(j), 0.05);
      const double hi = quantile(kept.col(j), 0.95);
      CAPTURE(j);
      CAPTURE(lo);
      CAPTURE(hi);
      CHECK(lo <= truth[j]);
      CHECK(truth[j] <= hi);
    }
  }

  TEST_CASE("gp regression generator") {
    const Dataset exact = gen_gp_regression(50, 3, 2, 0.0);
    for (Index i = 0; i < 50; ++i) CHECK(exact.y[i] == gp_polynomial(exact.x.row(i).transpose()));
    const Dataset d = gen_gp_regression(500, 4, 1);
    CHECK(d.x.rows() == 500);
    CHECK(d.x.cols() == 4);
    CHECK(d.feature_names.size() == 4);
    Vector residual(500);
    for (Index i = 0; i < 500; ++i) residual[i] = d.y[i] - gp_polynomial(d.x.row(i).transpose());
    CHECK(std::sqrt(residual.squaredNorm() / 500.0) == doctest::Approx(0.5).epsilon(0.1));
    // f(x) = sum (x - x^2 / 2) + 1/2 sum_{j<k} x_j x_k
    CHECK(gp_polynomial(vec({1.0, 2.0})) == doctest::Approx(0.5 + 0.0 + 1.0));
  }

  TEST_CASE("golden csv fixture") {
    CsvSchema schema;
    schema.label = "label";
    schema.classification = true;
    const Dataset d = load_csv(fixture("toy.csv"), schema);
    Matrix expected(3, 2);
    expected << 1.5, -2.0, 0.0, 3.25, -1e-3, 4.0;
    CHECK(d.x == expected);
    CHECK(d.y == vec({1.0, 0.0, 1.0}));
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(d.provenance.at("file") == fixture("toy.csv"));

    schema.features = {"b"};
    const Dataset only_b = load_csv(fixture("toy.csv"), schema);
    CHECK(only_b.x.cols() == 1);
    CHECK(only_b.x(1, 0) == 3.25);

    schema.features.clear();
    schema.standardize = {"*"};
    const Dataset scaled = load_csv(fixture("toy.csv"), schema);
    for (Index j = 0; j < 2; ++j) {
      CHECK(std::abs(scaled.x.col(j).mean()) < 1e-12);
      const double var = (scaled.x.col(j).array() - scaled.x.col(j).mean()).square().sum() / 2.0;
      CHECK(var == doctest::Approx(1.0));
    }
    CHECK(scaled.provenance.count("standardized") == 1);
  }

  TEST_CASE("csv errors") {
    CsvSchema schema;
    schema.label = "label";
    schema.classification = true;
    CHECK(error_of([&] { load_csv(fixture("header_only.csv"), schema); }).find("no data rows") != std::string::npos);
    const std::string bad = error_of([&] { load_csv(fixture("malformed.csv"), schema); });
    CHECK(bad.find("lines 3, 4") != std::string::npos);
    CHECK(error_of([&] { load_csv(fixture("three_labels.csv"), schema); }).find("not binary") != std::string::npos);
    CHECK(error_of([&] { load_csv(fixture("does_not_exist.csv"), schema); }).find("cannot open") != std::string::npos);
    schema.label = "missing";
    CHECK(error_of([&] { load_csv(fixture("toy.csv"), schema); }).find("not found") != std::string::npos);

    CsvSchema regression;
    regression.label = "label";
    CHECK(load_csv(fixture("three_labels.csv"), regression).y == vec({0.0, 1.0, 2.0}));
  }

  TEST_CASE("string labels need a positive class") {
    const auto path = temp_file("species.csv");
    {
      std::ofstream out(path);
      out << "x,kind\n1,spruce\n2,pine\n3,spruce\n";
    }
    CsvSchema schema;
    schema.label = "kind";
    schema.classification = true;
    CHECK_THROWS(load_csv(path.string(), schema));
    schema.positive_label = "spruce";
    const Dataset d = load_csv(path.string(), schema);
    CHECK(d.y == vec({1.0, 0.0, 1.0}));
    std::filesystem::remove(path);
  }

  TEST_CASE("subsampling is deterministic and keeps file order") {
    const Dataset full = gen_gp_regression(1000, 2, 5);
    const auto path = temp_file("subsample.csv");
    write_csv(path.string(), full);
    CsvSchema schema;
    schema.label = full.label_name;
    schema.subsample = 100;
    schema.subsample_seed = 7;
    const Dataset a = load_csv(path.string(), schema);
    const Dataset b = load_csv(path.string(), schema);
    schema.subsample_seed = 8;
    const Dataset c = load_csv(path.string(), schema);
    std::filesystem::remove(path);
    CHECK(a.x.rows() == 100);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.x != c.x);
    // Rows keep their relative order from the file.
    Index last = -1;
    for (Index i = 0; i < a.x.rows(); ++i) {
      Index found = -1;
      for (Index r = 0; r < full.x.rows(); ++r) {
        if (full.x.row(r) == a.x.row(i)) found = r;
      }
      REQUIRE(found >= 0);
      CHECK(found > last);
      last = found;
    }
  }

  TEST_CASE("csv round trip at full precision") {
    const Dataset d = gen_gp_regression(20, 3, 9);
    const auto path = temp_file("roundtrip.csv");
    write_csv(path.string(), d);
    CsvSchema schema;
    schema.label = d.label_name;
    const Dataset back = load_csv(path.string(), schema);
    CHECK(back.x == d.x);
    CHECK(back.y == d.y);

    std::vector<std::string> header;
    write_matrix_csv(path.string(), {"u", "v", "w"}, d.x);
    CHECK(read_matrix_csv(path.string(), &header) == d.x);
    CHECK(header == std::vector<std::string>{"u", "v", "w"});
    CHECK_THROWS_AS(write_matrix_csv(path.string(), {"u"}, d.x), std::invalid_argument);
    std::filesystem::remove(path);
  }
}
