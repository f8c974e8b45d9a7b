#pragma once

#include <nnghmc/common.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nnghmc {

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;
  std::string label_name = "y";
  // Generator and seed, or file, row filter, label mapping and scaling.
  std::map<std::string, std::string> provenance;

  Index size() const { return x.rows(); }
};

struct LogisticData {
  Dataset data;
  Vector beta;
};

/// X rows iid N(0, I), beta ~ U(-1, 1)^d unless given, y ~ Bernoulli(logistic(x.beta)).
LogisticData gen_logistic(Index n, Index d, std::uint64_t seed, std::optional<Vector> beta = std::nullopt);

/// GARCH series with N(0, sigma_t^2) innovations. `arch` holds
/// (alpha_0, ..., alpha_m) and `garch` (beta_1, ..., beta_r). Pre-sample
/// variances and squared observations equal the unconditional variance.
Vector gen_garch(Index length, const Vector& arch, const Vector& garch, std::uint64_t seed);

/// Mean function of the synthetic GP regression data:
/// f(x) = sum_j (x_j - 0.5 x_j^2) + 0.5 sum_{j<k} x_j x_k.
double gp_polynomial(const Vector& x);

/// X iid N(0, 1) of shape n x k, y = gp_polynomial(x) + N(0, noise_sd^2).
Dataset gen_gp_regression(Index n, Index k, std::uint64_t seed, double noise_sd = 0.5);

struct CsvSchema {
  std::string label;                  // label column name
  std::vector<std::string> features;  // empty: every other column
  bool classification = false;        // labels must be binary
  std::optional<std::string> positive_label;  // raw value mapped to 1
  Index subsample = 0;                // keep this many rows (0: all)
  std::uint64_t subsample_seed = 0;
  std::vector<std::string> standardize;  // columns to centre and scale; "*" for all features
};

/// Numeric CSV with a header row. Malformed rows are reported together by
/// line number. Subsampled rows keep their file order.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// Features then label, with a header, at full precision.
void write_csv(const std::string& path, const Dataset& data);

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& m);
Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);

}  // namespace nnghmc
