#include "hypervae/data/normalization.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hypervae::data {

namespace {

void require_bands(std::size_t got, const NormalizationParams& params) {
  if (got != params.bands()) {
    fail(ErrorCode::dimension_mismatch, "normalization expects " + std::to_string(params.bands()) +
                                            " bands, got " + std::to_string(got));
  }
}

}  // namespace

NormalizationParams fit_normalization(const SampleSet& samples,
                                      NormalizationGranularity granularity) {
  const SampleSet train = samples.subset(Split::train);
  if (train.records.empty()) {
    fail(ErrorCode::missing_split, "cannot fit normalization: no records labelled train");
  }
  nn::Matrix rows(static_cast<Eigen::Index>(train.size()),
                  static_cast<Eigen::Index>(train.rrs_wavelengths.size()));
  for (std::size_t r = 0; r < train.size(); ++r) {
    const auto& rrs = train.records[r].rrs;
    if (rrs.size() != train.rrs_wavelengths.size()) {
      fail(ErrorCode::dimension_mismatch, "record '" + train.records[r].id +
                                              "' has a different band count");
    }
    for (std::size_t b = 0; b < rrs.size(); ++b) {
      rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = rrs[b];
    }
  }
  try {
    return fit_normalization(rows, "train", granularity);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_band) throw;
    // Re-issue naming the band by wavelength.
    for (Eigen::Index b = 0; b < rows.cols(); ++b) {
      if (!(rows.col(b).maxCoeff() > rows.col(b).minCoeff()) ||
          granularity == NormalizationGranularity::global) {
        fail(ErrorCode::degenerate_band,
             "degenerate band rrs_" + format_number(train.rrs_wavelengths[static_cast<std::size_t>(b)]) +
                 " nm: training min equals max (" + format_number(rows.col(b).minCoeff()) + ")");
      }
    }
    throw;
  }
}

NormalizationParams fit_normalization(const nn::Matrix& rows, std::string computed_on,
                                      NormalizationGranularity granularity) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    fail(ErrorCode::invalid_argument, "cannot fit normalization on an empty subset");
  }
  if (!rows.allFinite()) fail(ErrorCode::non_finite, "normalization input is not finite");
  NormalizationParams params;
  params.computed_on = std::move(computed_on);
  const auto bands = static_cast<std::size_t>(rows.cols());
  if (granularity == NormalizationGranularity::global) {
    params.min.assign(bands, rows.minCoeff());
    params.max.assign(bands, rows.maxCoeff());
  } else {
    params.min.resize(bands);
    params.max.resize(bands);
    for (Eigen::Index b = 0; b < rows.cols(); ++b) {
      params.min[static_cast<std::size_t>(b)] = rows.col(b).minCoeff();
      params.max[static_cast<std::size_t>(b)] = rows.col(b).maxCoeff();
    }
  }
  for (std::size_t b = 0; b < bands; ++b) {
    if (!(params.max[b] > params.min[b])) {
      fail(ErrorCode::degenerate_band, "degenerate band " + std::to_string(b) +
                                           ": training min equals max (" +
                                           format_number(params.min[b]) + ")");
    }
  }
  return params;
}

std::vector<double> apply_normalization(std::span<const double> values,
                                        const NormalizationParams& params) {
  require_bands(values.size(), params);
  std::vector<double> out(values.size());
  for (std::size_t b = 0; b < values.size(); ++b) {
    out[b] = (values[b] - params.min[b]) / (params.max[b] - params.min[b]);
  }
  return out;
}

std::vector<double> invert_normalization(std::span<const double> values,
                                         const NormalizationParams& params) {
  require_bands(values.size(), params);
  std::vector<double> out(values.size());
  for (std::size_t b = 0; b < values.size(); ++b) {
    out[b] = values[b] * (params.max[b] - params.min[b]) + params.min[b];
  }
  return out;
}

nn::Matrix apply_normalization(const nn::Matrix& rows, const NormalizationParams& params) {
  require_bands(static_cast<std::size_t>(rows.cols()), params);
  nn::Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index b = 0; b < rows.cols(); ++b) {
      const auto k = static_cast<std::size_t>(b);
      out(r, b) = (rows(r, b) - params.min[k]) / (params.max[k] - params.min[k]);
    }
  }
  return out;
}

double log_transform_chla(double chla) {
  if (!(chla > 0.0)) {
    fail(ErrorCode::domain_error, "chla must be > 0 for the log10 transform, got " +
                                      format_number(chla));
  }
  return std::log10(chla);
}

double from_log10(double y) {
  return std::clamp(std::pow(10.0, y), std::numeric_limits<double>::min(),
                    std::numeric_limits<double>::max());
}

double invert_log_chla(double y) { return from_log10(y); }

}  // namespace hypervae::data
