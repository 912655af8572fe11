#include "hypervae/metrics/metrics.hpp"

#include "hypervae/data/samples.hpp"
#include "hypervae/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace hypervae::metrics {

namespace {

void require_pair(std::span<const double> e, std::span<const double> m, const char* what) {
  if (e.size() != m.size()) {
    fail(ErrorCode::dimension_mismatch, std::string(what) + ": " + std::to_string(e.size()) +
                                            " estimates vs " + std::to_string(m.size()) +
                                            " measurements");
  }
  if (e.empty()) fail(ErrorCode::invalid_argument, std::string(what) + ": empty input");
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (!std::isfinite(e[i]) || !std::isfinite(m[i])) {
      fail(ErrorCode::non_finite, std::string(what) + ": non-finite entry at index " +
                                      std::to_string(i));
    }
  }
}

void require_positive(std::span<const double> values, const char* what, const char* side) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) {
      fail(ErrorCode::domain_error, std::string(what) + ": " + side + "[" + std::to_string(i) +
                                        "] = " + data::format_number(values[i]) +
                                        " is not positive");
    }
  }
}

// log10(E_i) - log10(M_i) after domain checks.
std::vector<double> log_ratios(std::span<const double> e, std::span<const double> m,
                               const char* what) {
  require_pair(e, m, what);
  require_positive(e, what, "E");
  require_positive(m, what, "M");
  std::vector<double> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = std::log10(e[i]) - std::log10(m[i]);
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double male(std::span<const double> estimated, std::span<const double> measured) {
  auto r = log_ratios(estimated, measured, "male");
  for (double& x : r) x = std::abs(x);
  return std::pow(10.0, mean(r));
}

double rmse(std::span<const double> estimated, std::span<const double> measured) {
  require_pair(estimated, measured, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const double d = estimated[i] - measured[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(estimated.size()));
}

double rmsle(std::span<const double> estimated, std::span<const double> measured) {
  auto r = log_ratios(estimated, measured, "rmsle");
  for (double& x : r) x *= x;
  return std::sqrt(mean(r));
}

double log_bias(std::span<const double> estimated, std::span<const double> measured) {
  return std::pow(10.0, mean(log_ratios(estimated, measured, "log_bias")));
}

double slope(std::span<const double> estimated, std::span<const double> measured) {
  require_pair(estimated, measured, "slope");
  if (estimated.size() < 2) fail(ErrorCode::invalid_argument, "slope needs at least 2 samples");
  const double n = static_cast<double>(estimated.size());
  double e_bar = 0.0, m_bar = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    e_bar += estimated[i];
    m_bar += measured[i];
  }
  e_bar /= n;
  m_bar /= n;
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    cov += (measured[i] - m_bar) * (estimated[i] - e_bar);
    var += (measured[i] - m_bar) * (measured[i] - m_bar);
  }
  if (var == 0.0) fail(ErrorCode::domain_error, "slope undefined: measured values are constant");
  return cov / var;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::invalid_argument, "median of an empty vector");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

MedianMetrics median_metrics(std::span<const double> estimated, std::span<const double> measured) {
  const auto r = log_ratios(estimated, measured, "median_metrics");
  std::vector<double> rel(estimated.size());
  std::vector<double> abs_r(r.size());
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    rel[i] = std::abs(estimated[i] - measured[i]) / measured[i];
    abs_r[i] = std::abs(r[i]);
  }
  MedianMetrics out;
  out.mape = 100.0 * median(std::move(rel));
  out.epsilon = 100.0 * (std::pow(10.0, median(std::move(abs_r))) - 1.0);
  const double z = median(r);
  out.beta = 100.0 * sign(z) * (std::pow(10.0, std::abs(z)) - 1.0);
  return out;
}

MetricsReport evaluate_all(std::span<const double> estimated, std::span<const double> measured) {
  MetricsReport report;
  report.male = male(estimated, measured);
  report.rmse = rmse(estimated, measured);
  report.rmsle = rmsle(estimated, measured);
  report.log_bias = log_bias(estimated, measured);
  report.slope = slope(estimated, measured);
  const MedianMetrics med = median_metrics(estimated, measured);
  report.mape = med.mape;
  report.epsilon = med.epsilon;
  report.beta = med.beta;
  report.n = estimated.size();
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["male"] = male;
  j["rmse"] = rmse;
  j["rmsle"] = rmsle;
  j["log_bias"] = log_bias;
  j["slope"] = slope;
  j["mape"] = mape;
  j["epsilon"] = epsilon;
  j["beta"] = beta;
  return j.dump(2);
}

std::string metrics_csv_header() { return "n,male,rmse,rmsle,log_bias,slope,mape,epsilon,beta"; }

std::string metrics_csv_row(const MetricsReport& r) {
  std::string out = std::to_string(r.n);
  for (double v : {r.male, r.rmse, r.rmsle, r.log_bias, r.slope, r.mape, r.epsilon, r.beta}) {
    out += ',' + data::format_number(v);
  }
  return out;
}

std::string BandSweep::to_csv() const {
  std::string out = "band_nm," + metrics_csv_header() + '\n';
  for (std::size_t b = 0; b < reports.size(); ++b) {
    out += data::format_number(band_centers[b]) + ',' + metrics_csv_row(reports[b]) + '\n';
  }
  return out;
}

BandSweep sweep_per_band(const nn::Matrix& estimated, const nn::Matrix& measured,
                         const std::vector<double>& band_centers) {
  if (estimated.rows() != measured.rows() || estimated.cols() != measured.cols()) {
    fail(ErrorCode::dimension_mismatch, "sweep_per_band: estimate and truth shapes differ");
  }
  if (static_cast<std::size_t>(estimated.cols()) != band_centers.size()) {
    fail(ErrorCode::dimension_mismatch,
         "sweep_per_band: " + std::to_string(estimated.cols()) + " columns but grid has " +
             std::to_string(band_centers.size()) + " bands");
  }
  BandSweep sweep;
  sweep.band_centers = band_centers;
  for (Eigen::Index b = 0; b < estimated.cols(); ++b) {
    const Eigen::VectorXd e = estimated.col(b);
    const Eigen::VectorXd m = measured.col(b);
    sweep.reports.push_back(evaluate_all({e.data(), static_cast<std::size_t>(e.size())},
                                         {m.data(), static_cast<std::size_t>(m.size())}));
  }
  return sweep;
}

}  // namespace hypervae::metrics
