#pragma once

#include "hypervae/nn/rng.hpp"
#include "hypervae/nn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace hypervae::nn {

struct GradCheckOptions {
  double step = 1e-3;
  // 3: (f(x+h) - f(x-h)) / 2h, truncation O(h^2).
  // 5: (8(f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h, truncation O(h^4).
  // Batch norm over a handful of rows is curved enough that O(h^2) alone
  // reaches ~1e-4 at h = 1e-3, so the wider stencil is the default.
  int stencil = 5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error; below it the comparison is
  // effectively absolute. Raised automatically to the loss's rounding level,
  // 10 eps * |loss| / (step * tolerance).
  double scale_floor = 1e-6;
  // A coordinate that fails the tolerance is classified as straddling a
  // kink (|x| in L1, the LeakyReLU hinge) and excluded from the verdict when
  // its symmetric second differences deviate from the h^2 scaling of a
  // smooth function by more than this fraction, or when halving the step
  // moves the estimate by more than this fraction of its disagreement with
  // the analytic value.
  double kink_ratio = 0.1;
  // 0 checks every coordinate; otherwise that many coordinates per tensor
  // are drawn with `seed`.
  std::size_t max_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::size_t tensor = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
  bool kink = false;
};

/// The verdict uses one relative error per parameter tensor,
/// ||analytic - numeric|| / max(||analytic||, ||numeric||, scale_floor),
/// over the checked (non-kink) coordinates. Per-coordinate errors stay in
/// `entries` for diagnostics; they are dominated by O(h^2) truncation on
/// coordinates whose gradient is tiny next to the rest of their tensor.
struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  std::vector<double> tensor_errors;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;
  double tolerance = 0.0;

  bool passed() const { return max_relative_error < tolerance; }
};

/// Compares `analytic` gradients against central differences of `loss_fn`
/// evaluated while each coordinate of `params` is perturbed in place.
/// `loss_fn` must be deterministic in the parameter values.
GradCheckReport finite_difference_check(const std::function<double()>& loss_fn,
                                        const ParameterList& params,
                                        const ConstParameterList& analytic,
                                        const GradCheckOptions& options = {});

}  // namespace hypervae::nn
