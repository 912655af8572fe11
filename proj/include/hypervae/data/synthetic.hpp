#pragma once

#include "hypervae/data/samples.hpp"
#include "hypervae/nn/rng.hpp"

#include <vector>

namespace hypervae::data {

/// 1 nm spacing over [400, 700].
std::vector<double> fine_wavelengths();

struct OneToManyConfig {
  TargetSchema schema = TargetSchema::aphy;
  int n_rrs_shapes = 16;
  int modes_per_rrs = 2;
  std::vector<double> wavelengths = fine_wavelengths();
  // Lower bound on the distance between any two targets of one Rrs: mean
  // absolute per-band difference for aphy (m^-1), |delta log10| for chla.
  double min_mode_separation = 0.02;
};

/// Every base Rrs shape is emitted `modes_per_rrs` times, each time paired
/// with a target from a different family: Gaussian-bump aphy spectra whose
/// peak position and amplitude shift with the mode index, or chla values a
/// decade apart. `SampleRecord::mode` holds the true family.
SampleSet gen_one_to_many(const OneToManyConfig& config, nn::Rng& rng);

struct PairedConfig {
  TargetSchema schema = TargetSchema::aphy;
  int n_samples = 256;
  std::vector<double> wavelengths = fine_wavelengths();
};

/// One-to-one (Rrs, target) pairs from a smooth toy reflectance relation;
/// a learnable regression problem for training sanity checks and timing.
SampleSet gen_paired(const PairedConfig& config, nn::Rng& rng);

/// Mean absolute per-band difference.
double mean_abs_difference(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hypervae::data
