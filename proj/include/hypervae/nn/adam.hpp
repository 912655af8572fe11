#pragma once

#include "hypervae/nn/tensor.hpp"

#include <cstdint>
#include <vector>

namespace hypervae::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators are sized lazily on the first step and must keep the
/// same tensor layout afterwards.
struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step_count = 0;

  explicit AdamState(AdamConfig cfg = {}) : config(cfg) {}
};

/// One bias-corrected Adam update applied in place to `params`.
void adam_step(AdamState& state, const ParameterList& params, const ConstParameterList& grads);

}  // namespace hypervae::nn
