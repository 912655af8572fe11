#pragma once

#include "hypervae/nn/tensor.hpp"

namespace hypervae::nn {

/// Mean absolute difference over every element.
double l1_loss(const Matrix& pred, const Matrix& target);
/// d(l1_loss)/d(pred); the subgradient at a zero residual is 0.
Matrix l1_loss_backward(const Matrix& pred, const Matrix& target);

/// KL(N(mu, exp(logvar)) || N(0, I)), summed over latent dims and averaged
/// over the batch: mean_b 0.5 * sum_d (mu^2 + e^logvar - logvar - 1).
double kl_std_normal(const Matrix& mu, const Matrix& logvar);

struct KlGrads {
  Matrix mu;
  Matrix logvar;
};
KlGrads kl_std_normal_backward(const Matrix& mu, const Matrix& logvar);

}  // namespace hypervae::nn
