#include "hypervae/nn/adam.hpp"

#include "hypervae/error.hpp"

#include <cmath>
#include <string>

namespace hypervae::nn {

void adam_step(AdamState& state, const ParameterList& params, const ConstParameterList& grads) {
  if (params.size() != grads.size()) {
    fail(ErrorCode::dimension_mismatch, "adam_step: " + std::to_string(params.size()) +
                                            " parameter tensors vs " +
                                            std::to_string(grads.size()) + " gradient tensors");
  }
  if (state.first_moment.empty()) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      state.first_moment[t].assign(params[t].size(), 0.0);
      state.second_moment[t].assign(params[t].size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    fail(ErrorCode::dimension_mismatch, "adam_step: tensor count changed between steps");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() || params[t].size() != state.first_moment[t].size()) {
      fail(ErrorCode::dimension_mismatch,
           "adam_step: tensor " + std::to_string(t) + " has " + std::to_string(params[t].size()) +
               " parameters but " + std::to_string(grads[t].size()) + " gradients");
    }
  }

  ++state.step_count;
  const AdamConfig& c = state.config;
  const double step = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, step);
  const double correction2 = 1.0 - std::pow(c.beta2, step);
  const double step_size = c.learning_rate / correction1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(correction2);

  for (std::size_t t = 0; t < params.size(); ++t) {
    double* p = params[t].data();
    const double* g = grads[t].data();
    double* m = state.first_moment[t].data();
    double* v = state.second_moment[t].data();
    const std::size_t n = params[t].size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) * inv_sqrt_c2 + c.epsilon);
    }
  }
}

}  // namespace hypervae::nn
