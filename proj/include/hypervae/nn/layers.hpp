#pragma once

#include "hypervae/nn/rng.hpp"
#include "hypervae/nn/tensor.hpp"

namespace hypervae::nn {

enum class Mode { train, eval };

/// Affine map y = x W^T + b with W stored out_dim x in_dim.
struct DenseLayer {
  Matrix weights;
  RowVector bias;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct DenseGrads {
  Matrix input;  // empty when the input gradient was not requested
  Matrix weights;
  RowVector bias;
};

/// Kaiming-style uniform init, bound sqrt(6 / ((1 + slope^2) fan_in)); bias
/// drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
DenseLayer make_dense(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng,
                      double leaky_slope = 0.2);

Matrix dense_forward(const DenseLayer& layer, const Matrix& input);
DenseGrads dense_backward(const DenseLayer& layer, const Matrix& input,
                          const Matrix& grad_out, bool want_input_grad = true);

struct BatchNormLayer {
  RowVector gamma;
  RowVector beta;
  RowVector running_mean;
  RowVector running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  Eigen::Index dim() const { return gamma.size(); }
};

BatchNormLayer make_batchnorm(Eigen::Index dim, double momentum = 0.1,
                              double epsilon = 1e-5);

/// Statistics captured by a train-mode pass; needed for the backward pass
/// and for the running-statistics update.
struct BatchNormCache {
  Matrix normalized;
  RowVector batch_mean;
  RowVector batch_var;  // biased (divides by batch size)
  RowVector inv_std;
};

struct BatchNormGrads {
  Matrix input;
  RowVector gamma;
  RowVector beta;
};

/// Pure forward pass. Train mode normalizes by batch statistics (batch >= 2)
/// and fills `cache` when given; eval mode uses the running statistics.
Matrix batchnorm_forward(const BatchNormLayer& layer, const Matrix& input, Mode mode,
                         BatchNormCache* cache = nullptr);

/// Momentum update of the running statistics from a train-mode cache. The
/// running variance uses the unbiased batch estimate.
void batchnorm_update_running(BatchNormLayer& layer, const BatchNormCache& cache);

/// Forward pass that also updates the running statistics in train mode.
Matrix batchnorm_apply(BatchNormLayer& layer, const Matrix& input, Mode mode);

BatchNormGrads batchnorm_backward(const BatchNormLayer& layer, const BatchNormCache& cache,
                                  const Matrix& grad_out);

Matrix leaky_relu(const Matrix& x, double slope = 0.2);
/// Derivative is 1 for x > 0 and `slope` otherwise.
Matrix leaky_relu_backward(const Matrix& x, const Matrix& grad_out, double slope = 0.2);

/// log(1 + e^x), never below the smallest normal double.
Matrix softplus(const Matrix& x);
Matrix softplus_backward(const Matrix& x, const Matrix& grad_out);

// Dense -> BatchNorm -> LeakyReLU, the repeated unit of every hidden stack.
struct HiddenBlock {
  DenseLayer dense;
  BatchNormLayer norm;
};

struct HiddenBlockCache {
  Matrix input;
  BatchNormCache norm;
  Matrix normalized_out;  // batch-norm output, pre-activation
};

struct HiddenBlockGrads {
  DenseGrads dense;
  RowVector gamma;
  RowVector beta;
};

HiddenBlock make_hidden_block(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng);

Matrix hidden_forward(const HiddenBlock& block, const Matrix& input, Mode mode,
                      HiddenBlockCache* cache = nullptr, double slope = 0.2);
HiddenBlockGrads hidden_backward(const HiddenBlock& block, const HiddenBlockCache& cache,
                                 const Matrix& grad_out, bool want_input_grad = true,
                                 double slope = 0.2);

void append_parameters(ParameterList& out, DenseLayer& layer);
void append_parameters(ParameterList& out, HiddenBlock& block);
void append_gradients(ParameterList& out, DenseGrads& grads);
void append_gradients(ParameterList& out, HiddenBlockGrads& grads);

}  // namespace hypervae::nn
