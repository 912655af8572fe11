#pragma once

#include "hypervae/nn/tensor.hpp"

#include <span>
#include <string>
#include <vector>

// Regression metrics for predicted (E) versus measured (M) values. Every log
// is base 10. Log-domain metrics reject non-positive entries instead of
// dropping them.
namespace hypervae::metrics {

double male(std::span<const double> estimated, std::span<const double> measured);
double rmse(std::span<const double> estimated, std::span<const double> measured);
double rmsle(std::span<const double> estimated, std::span<const double> measured);
double log_bias(std::span<const double> estimated, std::span<const double> measured);
/// Least-squares slope of E regressed on M; needs n >= 2 and non-constant M.
double slope(std::span<const double> estimated, std::span<const double> measured);

/// Median of a copy; even lengths average the two central values.
double median(std::vector<double> values);

struct MedianMetrics {
  double mape = 0.0;
  double epsilon = 0.0;
  double beta = 0.0;
};

MedianMetrics median_metrics(std::span<const double> estimated, std::span<const double> measured);

struct MetricsReport {
  double male = 0.0;
  double rmse = 0.0;
  double rmsle = 0.0;
  double log_bias = 0.0;
  double slope = 0.0;
  double mape = 0.0;
  double epsilon = 0.0;
  double beta = 0.0;
  std::size_t n = 0;

  std::string to_json() const;
};

MetricsReport evaluate_all(std::span<const double> estimated, std::span<const double> measured);

struct BandSweep {
  std::vector<double> band_centers;
  std::vector<MetricsReport> reports;

  /// band_nm,n,male,rmse,rmsle,log_bias,slope,mape,epsilon,beta
  std::string to_csv() const;
};

/// evaluate_all applied to every column of samples x bands matrices.
BandSweep sweep_per_band(const nn::Matrix& estimated, const nn::Matrix& measured,
                         const std::vector<double>& band_centers);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);

}  // namespace hypervae::metrics
