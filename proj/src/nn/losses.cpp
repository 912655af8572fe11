#include "hypervae/nn/losses.hpp"

#include "hypervae/error.hpp"

#include <string>

namespace hypervae::nn {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::dimension_mismatch,
         std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
             std::to_string(b.cols()));
  }
}

}  // namespace

double l1_loss(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "l1_loss");
  if (pred.size() == 0) fail(ErrorCode::invalid_argument, "l1_loss: empty input");
  return (pred - target).cwiseAbs().sum() / static_cast<double>(pred.size());
}

Matrix l1_loss_backward(const Matrix& pred, const Matrix& target) {
  require_same_shape(pred, target, "l1_loss_backward");
  const double scale = 1.0 / static_cast<double>(pred.size());
  return pred.binaryExpr(target, [scale](double p, double t) {
    const double d = p - t;
    return d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
  });
}

double kl_std_normal(const Matrix& mu, const Matrix& logvar) {
  require_same_shape(mu, logvar, "kl_std_normal");
  if (!mu.allFinite() || !logvar.allFinite()) {
    fail(ErrorCode::non_finite, "kl_std_normal: non-finite mu or logvar");
  }
  if (mu.rows() == 0) fail(ErrorCode::invalid_argument, "kl_std_normal: empty batch");
  const auto terms = mu.array().square() + logvar.array().exp() - logvar.array() - 1.0;
  return 0.5 * terms.sum() / static_cast<double>(mu.rows());
}

KlGrads kl_std_normal_backward(const Matrix& mu, const Matrix& logvar) {
  require_same_shape(mu, logvar, "kl_std_normal_backward");
  const double inv_batch = 1.0 / static_cast<double>(mu.rows());
  KlGrads grads;
  grads.mu = mu * inv_batch;
  grads.logvar = (0.5 * inv_batch) * (logvar.array().exp() - 1.0).matrix();
  return grads;
}

}  // namespace hypervae::nn
