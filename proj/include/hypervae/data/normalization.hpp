#pragma once

#include "hypervae/data/samples.hpp"
#include "hypervae/nn/tensor.hpp"

#include <string>
#include <vector>

namespace hypervae::data {

enum class NormalizationGranularity {
  per_band,  // min/max of each band over the training rows
  global,    // one min/max over every training value, broadcast to all bands
};

/// Min-max scaling fitted on the training split. `computed_on` names the
/// split the statistics came from and is checked before use.
struct NormalizationParams {
  std::vector<double> min;
  std::vector<double> max;
  std::string computed_on;

  std::size_t bands() const { return min.size(); }
};

/// Fits on the records labelled `train`; every other split is ignored.
NormalizationParams fit_normalization(const SampleSet& samples,
                                      NormalizationGranularity granularity =
                                          NormalizationGranularity::per_band);
/// Fits on explicit rows (one spectrum per row), tagging them `computed_on`.
NormalizationParams fit_normalization(const nn::Matrix& rows, std::string computed_on,
                                      NormalizationGranularity granularity =
                                          NormalizationGranularity::per_band);

/// x' = (x - min) / (max - min). Values outside the training range map
/// outside [0, 1]; nothing is clamped.
std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationParams& params);
std::vector<double> invert_normalization(std::span<const double> values,
                                         const NormalizationParams& params);
nn::Matrix apply_normalization(const nn::Matrix& rows, const NormalizationParams& params);

double log_transform_chla(double chla);
/// 10^y, clamped into the finite positive doubles so that no input,
/// however far out of range, yields 0 or inf.
double from_log10(double y);
double invert_log_chla(double y);

}  // namespace hypervae::data
