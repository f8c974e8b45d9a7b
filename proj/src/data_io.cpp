#include <nnghmc/data_io.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nnghmc {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && ptr == end && std::isfinite(v);
}

std::string join_lines(const std::vector<long>& lines) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(lines.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) s += (i ? ", " : "") + std::to_string(lines[i]);
  if (lines.size() > shown) s += ", ... (" + std::to_string(lines.size()) + " total)";
  return s;
}

}  // namespace

LogisticData gen_logistic(Index n, Index d, std::uint64_t seed, std::optional<Vector> beta) {
  if (n < 1 || d < 1) throw std::invalid_argument("gen_logistic: n and d must be >= 1");
  Rng rng = make_rng(seed, Stream::data);
  LogisticData out;
  if (beta) {
    if (beta->size() != d) throw std::invalid_argument("gen_logistic: beta has wrong length");
    out.beta = *beta;
  } else {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    out.beta.resize(d);
    for (Index j = 0; j < d; ++j) out.beta[j] = u(rng);
  }
  Dataset& ds = out.data;
  ds.x.resize(n, d);
  ds.y.resize(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.x(i, j) = normal(rng);
    const double prob = 1.0 / (1.0 + std::exp(-ds.x.row(i).dot(out.beta)));
    ds.y[i] = unit(rng) < prob ? 1.0 : 0.0;
  }
  for (Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  ds.provenance = {{"generator", "logistic"},
                   {"seed", std::to_string(seed)},
                   {"n", std::to_string(n)},
                   {"d", std::to_string(d)},
                   {"beta", beta ? "given" : "uniform(-1,1)"}};
  return out;
}

Vector gen_garch(Index length, const Vector& arch, const Vector& garch, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("gen_garch: length must be >= 1");
  if (arch.size() < 1 || !(arch[0] > 0.0)) throw std::invalid_argument("gen_garch: alpha_0 must be positive");
  if ((arch.array() < 0.0).any() || (garch.array() < 0.0).any()) {
    throw std::invalid_argument("gen_garch: coefficients must be non-negative");
  }
  const Index m = arch.size() - 1;
  const Index r = garch.size();
  const double persistence = arch.tail(m).sum() + garch.sum();
  if (!(persistence < 1.0)) throw std::invalid_argument("gen_garch: parameters are not stationary");
  const double unconditional = arch[0] / (1.0 - persistence);

  Rng rng = make_rng(seed, Stream::data);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index lag = std::max(m, r);
  std::vector<double> y2(static_cast<std::size_t>(lag + length), unconditional);
  std::vector<double> s2(static_cast<std::size_t>(lag + length), unconditional);
  Vector y(length);
  for (Index t = 0; t < length; ++t) {
    const std::size_t k = static_cast<std::size_t>(lag + t);
    double v = arch[0];
    for (Index j = 1; j <= m; ++j) v += arch[j] * y2[k - static_cast<std::size_t>(j)];
    for (Index j = 1; j <= r; ++j) v += garch[j - 1] * s2[k - static_cast<std::size_t>(j)];
    s2[k] = v;
    y[t] = std::sqrt(v) * normal(rng);
    y2[k] = y[t] * y[t];
  }
  return y;
}

double gp_polynomial(const Vector& x) {
  double f = 0.0;
  for (Index j = 0; j < x.size(); ++j) {
    f += x[j] - 0.5 * x[j] * x[j];
    for (Index k = j + 1; k < x.size(); ++k) f += 0.5 * x[j] * x[k];
  }
  return f;
}

Dataset gen_gp_regression(Index n, Index k, std::uint64_t seed, double noise_sd) {
  if (n < 1 || k < 1) throw std::invalid_argument("gen_gp_regression: n and k must be >= 1");
  if (noise_sd < 0.0) throw std::invalid_argument("gen_gp_regression: noise_sd must be non-negative");
  Rng rng = make_rng(seed, Stream::data);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset ds;
  ds.x.resize(n, k);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) ds.x(i, j) = normal(rng);
  }
  for (Index i = 0; i < n; ++i) {
    ds.y[i] = gp_polynomial(ds.x.row(i).transpose());
    if (noise_sd > 0.0) ds.y[i] += noise_sd * normal(rng);
  }
  for (Index j = 0; j < k; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
  ds.provenance = {{"generator", "gp_regression"},
                   {"seed", std::to_string(seed)},
                   {"n", std::to_string(n)},
                   {"k", std::to_string(k)},
                   {"noise_sd", format_double(noise_sd)},
                   {"mean_function", "sum_j (x_j - 0.5 x_j^2) + 0.5 sum_{j<k} x_j x_k"}};
  return ds;
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: " + path + " is empty");
  const std::vector<std::string> header = split(line);

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("load_csv: column '" + name + "' not found in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = column(schema.label);
  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names = schema.features;
  if (feature_names.empty()) {
    for (const auto& h : header) {
      if (h != schema.label) feature_names.push_back(h);
    }
  }
  for (const auto& f : feature_names) feature_cols.push_back(column(f));

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::vector<long> bad_lines;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      bad_lines.push_back(line_no);
      continue;
    }
    std::vector<double> row(feature_cols.size());
    bool ok = true;
    for (std::size_t j = 0; j < feature_cols.size() && ok; ++j) ok = parse_double(cells[feature_cols[j]], row[j]);
    double label_value = 0.0;
    if (!schema.classification && !parse_double(cells[label_col], label_value)) ok = false;
    if (schema.classification && cells[label_col].empty()) ok = false;
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    row.push_back(label_value);
    rows.push_back(std::move(row));
    raw_labels.push_back(cells[label_col]);
  }
  if (!bad_lines.empty()) {
    throw std::runtime_error("load_csv: malformed rows in " + path + " at lines " + join_lines(bad_lines));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: " + path + " has no data rows");

  Dataset ds;
  ds.feature_names = feature_names;
  ds.label_name = schema.label;
  ds.provenance["file"] = path;
  ds.provenance["rows_in_file"] = std::to_string(rows.size());

  std::vector<double> labels(rows.size());
  if (schema.classification) {
    std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    std::string positive;
    if (schema.positive_label) {
      positive = *schema.positive_label;
      if (distinct.size() > 2 || (distinct.size() == 2 && !distinct.count(positive))) {
        throw std::runtime_error("load_csv: label column '" + schema.label + "' is not binary");
      }
    } else {
      if (distinct.size() > 2) throw std::runtime_error("load_csv: label column '" + schema.label + "' is not binary");
      std::vector<double> values;
      for (const auto& s : distinct) {
        double v = 0.0;
        if (!parse_double(s, v)) {
          throw std::runtime_error("load_csv: non-numeric binary labels need an explicit positive label");
        }
        values.push_back(v);
      }
      const auto hi = std::max_element(values.begin(), values.end()) - values.begin();
      positive = *std::next(distinct.begin(), hi);
      if (distinct.size() == 1) {
        double v = 0.0;
        parse_double(positive, v);
        if (v != 1.0) positive.clear();
      }
    }
    for (std::size_t i = 0; i < raw_labels.size(); ++i) labels[i] = raw_labels[i] == positive ? 1.0 : 0.0;
    ds.provenance["label_mapping"] = positive.empty() ? "all 0" : "'" + positive + "' -> 1, other -> 0";
  } else {
    for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = rows[i].back();
  }

  std::vector<std::size_t> keep(rows.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (schema.subsample > 0 && static_cast<std::size_t>(schema.subsample) < rows.size()) {
    Rng rng = make_rng(schema.subsample_seed, Stream::data);
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(static_cast<std::size_t>(schema.subsample));
    std::sort(keep.begin(), keep.end());
    ds.provenance["row_filter"] =
        "subsample " + std::to_string(schema.subsample) + " seed " + std::to_string(schema.subsample_seed);
  }

  ds.x.resize(static_cast<Index>(keep.size()), static_cast<Index>(feature_cols.size()));
  ds.y.resize(static_cast<Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      ds.x(static_cast<Index>(i), static_cast<Index>(j)) = rows[keep[i]][j];
    }
    ds.y[static_cast<Index>(i)] = labels[keep[i]];
  }

  const bool all = std::find(schema.standardize.begin(), schema.standardize.end(), "*") != schema.standardize.end();
  std::string scaled;
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    const bool pick = all || std::find(schema.standardize.begin(), schema.standardize.end(), feature_names[j]) !=
                                 schema.standardize.end();
    if (!pick) continue;
    auto col = ds.x.col(static_cast<Index>(j));
    const double mean = col.mean();
    const double var = col.size() > 1 ? (col.array() - mean).square().sum() / static_cast<double>(col.size() - 1) : 0.0;
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    col = (col.array() - mean) / sd;
    scaled += (scaled.empty() ? "" : ";") + feature_names[j] + ":" + format_double(mean) + ":" + format_double(sd);
  }
  for (const auto& name : schema.standardize) {
    if (name != "*" && std::find(feature_names.begin(), feature_names.end(), name) == feature_names.end()) {
      throw std::runtime_error("load_csv: cannot standardize unknown feature '" + name + "'");
    }
  }
  if (!scaled.empty()) ds.provenance["standardized"] = scaled;
  return ds;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& m) {
  if (!header.empty() && static_cast<Index>(header.size()) != m.cols()) {
    throw std::invalid_argument("write_matrix_csv: header does not match column count");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_csv: cannot open " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_matrix_csv: write failed for " + path);
}

Matrix read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_matrix_csv: " + path + " is empty");
  const auto names = split(line);
  if (header) *header = names;
  std::vector<double> values;
  std::vector<long> bad_lines;
  long line_no = 1;
  Index rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    bool ok = cells.size() == names.size();
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size() && ok; ++j) ok = parse_double(cells[j], row[j]);
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (!bad_lines.empty()) {
    throw std::runtime_error("read_matrix_csv: malformed rows in " + path + " at lines " + join_lines(bad_lines));
  }
  const Index cols = static_cast<Index>(names.size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::vector<std::string> header = data.feature_names;
  if (static_cast<Index>(header.size()) != data.x.cols()) {
    header.clear();
    for (Index j = 0; j < data.x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  }
  header.push_back(data.label_name);
  Matrix m(data.x.rows(), data.x.cols() + 1);
  m << data.x, data.y;
  write_matrix_csv(path, header, m);
}

}  // namespace nnghmc
