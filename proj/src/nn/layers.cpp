#include "hypervae/nn/layers.hpp"

#include "hypervae/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hypervae::nn {

namespace {

void require_width(const Matrix& input, Eigen::Index expected, const char* what) {
  if (input.cols() != expected) {
    fail(ErrorCode::dimension_mismatch,
         std::string(what) + ": input width " + std::to_string(input.cols()) +
             " does not match layer in_dim " + std::to_string(expected));
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::dimension_mismatch,
         std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
             std::to_string(b.cols()));
  }
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

DenseLayer make_dense(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng, double leaky_slope) {
  if (in_dim <= 0 || out_dim <= 0) {
    fail(ErrorCode::invalid_argument, "dense layer dims must be positive, got " +
                                          std::to_string(in_dim) + "->" + std::to_string(out_dim));
  }
  const double fan_in = static_cast<double>(in_dim);
  const double w_bound = std::sqrt(6.0 / ((1.0 + leaky_slope * leaky_slope) * fan_in));
  const double b_bound = 1.0 / std::sqrt(fan_in);
  DenseLayer layer{Matrix(out_dim, in_dim), RowVector(out_dim)};
  for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
    layer.weights.data()[i] = (2.0 * rng.uniform() - 1.0) * w_bound;
  }
  for (Eigen::Index i = 0; i < out_dim; ++i) {
    layer.bias[i] = (2.0 * rng.uniform() - 1.0) * b_bound;
  }
  return layer;
}

Matrix dense_forward(const DenseLayer& layer, const Matrix& input) {
  require_width(input, layer.in_dim(), "dense_forward");
  Matrix out(input.rows(), layer.out_dim());
  out.noalias() = input * layer.weights.transpose();
  out.rowwise() += layer.bias;
  return out;
}

DenseGrads dense_backward(const DenseLayer& layer, const Matrix& input, const Matrix& grad_out,
                          bool want_input_grad) {
  require_width(input, layer.in_dim(), "dense_backward");
  if (grad_out.rows() != input.rows() || grad_out.cols() != layer.out_dim()) {
    fail(ErrorCode::dimension_mismatch,
         "dense_backward: grad_out " + std::to_string(grad_out.rows()) + "x" +
             std::to_string(grad_out.cols()) + " vs expected " + std::to_string(input.rows()) +
             "x" + std::to_string(layer.out_dim()));
  }
  DenseGrads grads;
  if (want_input_grad) {
    grads.input.resize(input.rows(), layer.in_dim());
    grads.input.noalias() = grad_out * layer.weights;
  }
  grads.weights.resize(layer.out_dim(), layer.in_dim());
  grads.weights.noalias() = grad_out.transpose() * input;
  grads.bias = grad_out.colwise().sum();
  return grads;
}

BatchNormLayer make_batchnorm(Eigen::Index dim, double momentum, double epsilon) {
  if (dim <= 0) fail(ErrorCode::invalid_argument, "batch norm dim must be positive");
  if (!(momentum > 0.0 && momentum < 1.0)) {
    fail(ErrorCode::invalid_argument, "batch norm momentum must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) fail(ErrorCode::invalid_argument, "batch norm epsilon must be > 0");
  return BatchNormLayer{RowVector::Ones(dim), RowVector::Zero(dim), RowVector::Zero(dim),
                        RowVector::Ones(dim), momentum, epsilon};
}

Matrix batchnorm_forward(const BatchNormLayer& layer, const Matrix& input, Mode mode,
                         BatchNormCache* cache) {
  require_width(input, layer.dim(), "batchnorm");
  if (mode == Mode::eval) {
    const RowVector inv_std = (layer.running_var.array() + layer.epsilon).rsqrt().matrix();
    const RowVector scale = layer.gamma.cwiseProduct(inv_std);
    const RowVector shift = layer.beta - layer.running_mean.cwiseProduct(scale);
    Matrix out = input.array().rowwise() * scale.array();
    out.rowwise() += shift;
    return out;
  }
  if (input.rows() < 2) {
    fail(ErrorCode::invalid_argument,
         "batchnorm in train mode needs a batch of at least 2, got " + std::to_string(input.rows()));
  }
  const double n = static_cast<double>(input.rows());
  RowVector mean = input.colwise().mean();
  Matrix centered = input.rowwise() - mean;
  RowVector var = centered.array().square().colwise().sum().matrix() / n;
  RowVector inv_std = (var.array() + layer.epsilon).rsqrt().matrix();
  Matrix normalized = centered.array().rowwise() * inv_std.array();
  Matrix out = normalized.array().rowwise() * layer.gamma.array();
  out.rowwise() += layer.beta;
  if (cache != nullptr) {
    cache->normalized = std::move(normalized);
    cache->batch_mean = std::move(mean);
    cache->batch_var = std::move(var);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

void batchnorm_update_running(BatchNormLayer& layer, const BatchNormCache& cache) {
  const double n = static_cast<double>(cache.normalized.rows());
  const double m = layer.momentum;
  layer.running_mean = (1.0 - m) * layer.running_mean + m * cache.batch_mean;
  layer.running_var = (1.0 - m) * layer.running_var + m * (cache.batch_var * (n / (n - 1.0)));
}

Matrix batchnorm_apply(BatchNormLayer& layer, const Matrix& input, Mode mode) {
  if (mode == Mode::eval) return batchnorm_forward(layer, input, mode);
  BatchNormCache cache;
  Matrix out = batchnorm_forward(layer, input, mode, &cache);
  batchnorm_update_running(layer, cache);
  return out;
}

BatchNormGrads batchnorm_backward(const BatchNormLayer& layer, const BatchNormCache& cache,
                                  const Matrix& grad_out) {
  require_same_shape(cache.normalized, grad_out, "batchnorm_backward");
  const double n = static_cast<double>(grad_out.rows());
  BatchNormGrads grads;
  grads.beta = grad_out.colwise().sum();
  grads.gamma = grad_out.cwiseProduct(cache.normalized).colwise().sum();
  // dx = inv_std / n * (n * dxhat - sum(dxhat) - xhat * sum(dxhat * xhat))
  Matrix dxhat = grad_out.array().rowwise() * layer.gamma.array();
  const RowVector sum_dxhat = dxhat.colwise().sum();
  const RowVector sum_dxhat_xhat = dxhat.cwiseProduct(cache.normalized).colwise().sum();
  Matrix dx = (n * dxhat).rowwise() - sum_dxhat;
  dx -= (cache.normalized.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  grads.input = dx.array().rowwise() * (cache.inv_std.array() / n);
  return grads;
}

Matrix leaky_relu(const Matrix& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix leaky_relu_backward(const Matrix& x, const Matrix& grad_out, double slope) {
  require_same_shape(x, grad_out, "leaky_relu_backward");
  return x.binaryExpr(grad_out, [slope](double v, double g) { return v > 0.0 ? g : slope * g; });
}

Matrix softplus(const Matrix& x) {
  // exp underflows below about -745; the floor keeps the result strictly positive.
  return x.unaryExpr([](double v) {
    return std::max(std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))),
                    std::numeric_limits<double>::min());
  });
}

Matrix softplus_backward(const Matrix& x, const Matrix& grad_out) {
  require_same_shape(x, grad_out, "softplus_backward");
  return x.binaryExpr(grad_out, [](double v, double g) {
    // logistic sigmoid without overflow
    const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    return g * s;
  });
}

HiddenBlock make_hidden_block(Eigen::Index in_dim, Eigen::Index out_dim, Rng& rng) {
  return HiddenBlock{make_dense(in_dim, out_dim, rng), make_batchnorm(out_dim)};
}

Matrix hidden_forward(const HiddenBlock& block, const Matrix& input, Mode mode,
                      HiddenBlockCache* cache, double slope) {
  Matrix pre = dense_forward(block.dense, input);
  if (cache == nullptr) {
    return leaky_relu(batchnorm_forward(block.norm, pre, mode), slope);
  }
  cache->input = input;
  cache->normalized_out = batchnorm_forward(block.norm, pre, mode, &cache->norm);
  return leaky_relu(cache->normalized_out, slope);
}

HiddenBlockGrads hidden_backward(const HiddenBlock& block, const HiddenBlockCache& cache,
                                 const Matrix& grad_out, bool want_input_grad, double slope) {
  const Matrix grad_norm_out = leaky_relu_backward(cache.normalized_out, grad_out, slope);
  BatchNormGrads bn = batchnorm_backward(block.norm, cache.norm, grad_norm_out);
  HiddenBlockGrads grads;
  grads.dense = dense_backward(block.dense, cache.input, bn.input, want_input_grad);
  grads.gamma = std::move(bn.gamma);
  grads.beta = std::move(bn.beta);
  return grads;
}

void append_parameters(ParameterList& out, DenseLayer& layer) {
  out.push_back(view(layer.weights));
  out.push_back(view(layer.bias));
}

void append_parameters(ParameterList& out, HiddenBlock& block) {
  append_parameters(out, block.dense);
  out.push_back(view(block.norm.gamma));
  out.push_back(view(block.norm.beta));
}

void append_gradients(ParameterList& out, DenseGrads& grads) {
  out.push_back(view(grads.weights));
  out.push_back(view(grads.bias));
}

void append_gradients(ParameterList& out, HiddenBlockGrads& grads) {
  append_gradients(out, grads.dense);
  out.push_back(view(grads.gamma));
  out.push_back(view(grads.beta));
}

}  // namespace hypervae::nn
