#pragma once

#include "hypervae/data/samples.hpp"

#include <span>
#include <vector>

namespace hypervae::data {

struct QualityConfig {
  // Spectra whose normalized roughness exceeds this are rejected as zigzag.
  double max_roughness = 0.5;
};

/// Mean squared second difference divided by the mean squared value.
/// Zero for spectra shorter than three bands or identically zero.
double roughness_score(std::span<const double> values);

struct QualityResult {
  SampleSet kept;
  std::vector<Rejection> rejected;
};

/// Rejects records with any non-finite ("nan") or negative ("negative")
/// value in Rrs or the target, then records whose Rrs or aphy spectrum is
/// too rough ("zigzag"). Kept records are copied unmodified and in order.
QualityResult quality_control(const SampleSet& samples, const QualityConfig& config = {});

}  // namespace hypervae::data
