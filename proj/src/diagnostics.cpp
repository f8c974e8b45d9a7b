#include <nnghmc/diagnostics.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace nnghmc {

namespace {

Matrix drop_burn_in(const Matrix& draws, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw std::invalid_argument("ess: burn-in fraction must be in [0, 1)");
  const Index skip = static_cast<Index>(std::floor(burn_in * static_cast<double>(draws.rows())));
  return draws.bottomRows(draws.rows() - skip);
}

double autocovariance(const Vector& centred, Index lag) {
  const Index n = centred.size();
  return centred.head(n - lag).dot(centred.tail(n - lag)) / static_cast<double>(n);
}

double sample_variance(const Vector& x) {
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace

UnivariateEss effective_sample_size(const Vector& series) {
  const Index n = series.size();
  if (n < 2) throw std::invalid_argument("ess: need at least 2 draws");
  const Vector c = series.array() - series.mean();
  const double gamma0 = autocovariance(c, 0);
  const double scale = std::max(1.0, series.cwiseAbs().maxCoeff());
  if (!(gamma0 > 1e-28 * scale * scale)) return {1.0, true};

  double tau = -1.0;
  for (Index k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (autocovariance(c, 2 * k) + autocovariance(c, 2 * k + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  const double nd = static_cast<double>(n);
  if (!(tau > 1.0 / nd)) return {nd, false};
  return {std::clamp(nd / tau, 1.0, nd), false};
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

EssReport ess(const Matrix& draws, double burn_in, double seconds) {
  const Matrix kept = drop_burn_in(draws, burn_in);
  if (kept.rows() < 100) throw std::invalid_argument("ess: need at least 100 draws after burn-in");
  if (kept.cols() == 0) throw std::invalid_argument("ess: chain has no dimensions");
  EssReport r;
  r.burn_in = burn_in;
  r.n_used = kept.rows();
  r.per_dim.resize(kept.cols());
  for (Index j = 0; j < kept.cols(); ++j) {
    const UnivariateEss e = effective_sample_size(kept.col(j));
    r.per_dim[j] = e.value;
    r.degenerate = r.degenerate || e.degenerate;
  }
  r.min = r.per_dim.minCoeff();
  r.max = r.per_dim.maxCoeff();
  r.median = median({r.per_dim.data(), r.per_dim.data() + r.per_dim.size()});
  r.seconds = seconds;
  r.median_per_second = seconds > 0.0 ? r.median / seconds : 0.0;
  return r;
}

double ks_statistic(const Vector& a, const Vector& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("ks: empty sample");
  std::vector<double> x(a.data(), a.data() + a.size());
  std::vector<double> y(b.data(), b.data() + b.size());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

Vector post_burn_in_mean(const Matrix& draws, double burn_in) {
  return drop_burn_in(draws, burn_in).colwise().mean().transpose();
}

Vector mc_standard_errors(const Matrix& draws, double burn_in) {
  const Matrix kept = drop_burn_in(draws, burn_in);
  Vector se(kept.cols());
  for (Index j = 0; j < kept.cols(); ++j) {
    const double n_eff = effective_sample_size(kept.col(j)).value;
    se[j] = std::sqrt(sample_variance(kept.col(j)) / n_eff);
  }
  return se;
}

ChainComparison compare_chains(const Matrix& a, const Matrix& b, double burn_in) {
  if (a.cols() != b.cols()) throw std::invalid_argument("compare_chains: dimension mismatch");
  const Matrix ka = drop_burn_in(a, burn_in);
  const Matrix kb = drop_burn_in(b, burn_in);
  if (ka.rows() < 2 || kb.rows() < 2) throw std::invalid_argument("compare_chains: chains too short");
  const Index d = a.cols();
  ChainComparison c;
  c.ks.resize(d);
  c.mean_z.resize(d);
  c.variance_z.resize(d);
  for (Index j = 0; j < d; ++j) {
    const Vector xa = ka.col(j);
    const Vector xb = kb.col(j);
    c.ks[j] = ks_statistic(xa, xb);
    const double ea = effective_sample_size(xa).value;
    const double eb = effective_sample_size(xb).value;
    const double va = sample_variance(xa);
    const double vb = sample_variance(xb);
    const double mean_se = std::sqrt(va / ea + vb / eb);
    const double gap = xa.mean() - xb.mean();
    c.mean_z[j] = mean_se > 0.0 ? gap / mean_se : (gap == 0.0 ? 0.0 : std::copysign(INFINITY, gap));
    auto var_se2 = [](const Vector& x, double v, double e) {
      const double m4 = (x.array() - x.mean()).pow(4).mean();
      return std::max(m4 - v * v, 0.0) / e;
    };
    const double var_se = std::sqrt(var_se2(xa, va, ea) + var_se2(xb, vb, eb));
    const double vgap = va - vb;
    c.variance_z[j] = var_se > 0.0 ? vgap / var_se : (vgap == 0.0 ? 0.0 : std::copysign(INFINITY, vgap));
  }
  c.max_ks = c.ks.maxCoeff();
  c.max_abs_mean_z = c.mean_z.cwiseAbs().maxCoeff();
  return c;
}

std::vector<SpeedRow> speed_report(const std::vector<SpeedInput>& inputs, std::size_t baseline) {
  if (baseline >= inputs.size()) throw std::invalid_argument("speed_report: baseline index out of range");
  std::vector<SpeedRow> rows;
  for (const auto& in : inputs) {
    if (!in.chain) throw std::invalid_argument("speed_report: missing chain for " + in.label);
    const double seconds = in.chain->elapsed.total();
    if (!(seconds > 0.0)) throw std::invalid_argument("speed_report: missing timings for " + in.label);
    const EssReport e = ess(in.chain->draws, kDefaultBurnIn, seconds);
    SpeedRow r;
    r.label = in.label;
    r.acceptance = in.chain->sampling_acceptance();
    r.ess_min = e.min;
    r.ess_median = e.median;
    r.ess_max = e.max;
    r.seconds = seconds;
    r.median_ess_per_second = e.median_per_second;
    rows.push_back(r);
  }
  const double base = rows[baseline].median_ess_per_second;
  for (auto& r : rows) r.speedup = r.median_ess_per_second / base;
  return rows;
}

std::string format_speed_table(const std::vector<SpeedRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %6s %24s %10s %12s %9s\n", "method", "AP", "ESS (min, med, max)",
                "time (s)", "med ESS/s", "speed-up");
  out << line;
  for (const auto& r : rows) {
    char triple[64];
    std::snprintf(triple, sizeof triple, "(%.0f, %.0f, %.0f)", r.ess_min, r.ess_median, r.ess_max);
    std::snprintf(line, sizeof line, "%-14s %6.2f %24s %10.2f %12.2f %9.2f\n", r.label.c_str(), r.acceptance,
                  triple, r.seconds, r.median_ess_per_second, r.speedup);
    out << line;
  }
  return out.str();
}

ChiSquareResult chi_square_standard_normal(const Vector& x, int bins) {
  if (bins < 2) throw std::invalid_argument("chi_square: need at least 2 bins");
  if (x.size() == 0) throw std::invalid_argument("chi_square: empty sample");
  const boost::math::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(boost::math::quantile(normal, static_cast<double>(k) / bins));
  std::vector<long> counts(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < x.size(); ++i) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x[i]);
    ++counts[static_cast<std::size_t>(it - edges.begin())];
  }
  const double expected = static_cast<double>(x.size()) / bins;
  ChiSquareResult r;
  for (long c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.dof = bins - 1;
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(r.dof), r.statistic));
  return r;
}

}  // namespace nnghmc
