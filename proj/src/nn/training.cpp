#include "hypervae/nn/training.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

namespace hypervae::nn {

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, end);
}

}  // namespace

std::string TrainHistory::to_csv() const {
  std::string out = "epoch,total_loss,reconstruction_loss,kl_loss,selection_loss,is_best\n";
  for (std::size_t e = 0; e < epochs(); ++e) {
    out += std::to_string(e + 1);
    for (double v : {total_loss[e], reconstruction_loss[e], kl_loss[e], selection_loss[e]}) {
      out += ',';
      append_number(out, v);
    }
    out += (best_epoch && *best_epoch == e) ? ",1\n" : ",0\n";
  }
  return out;
}

std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index n_samples, int batch_size,
                                                     Rng& rng) {
  if (batch_size < 2) fail(ErrorCode::invalid_argument, "batch_size must be at least 2");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng.engine());

  std::vector<std::vector<Eigen::Index>> batches;
  for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  if (batches.size() >= 2 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

Matrix gather_rows(const Matrix& source, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = source.row(rows[r]);
  }
  return out;
}

void validate_train_inputs(const TensorDataset& data, const TrainConfig& config,
                           Eigen::Index input_dim, Eigen::Index output_dim) {
  if (data.size() == 0) fail(ErrorCode::invalid_argument, "training set is empty");
  if (data.size() < 2) {
    fail(ErrorCode::invalid_argument, "training needs at least 2 samples for batch statistics");
  }
  if (data.targets.rows() != data.inputs.rows()) {
    fail(ErrorCode::dimension_mismatch, "training inputs and targets differ in row count");
  }
  if (data.inputs.cols() != input_dim) {
    fail(ErrorCode::dimension_mismatch, "training input width " +
                                            std::to_string(data.inputs.cols()) +
                                            " does not match model input_dim " +
                                            std::to_string(input_dim));
  }
  if (data.targets.cols() != output_dim) {
    fail(ErrorCode::dimension_mismatch, "training target width " +
                                            std::to_string(data.targets.cols()) +
                                            " does not match model output_dim " +
                                            std::to_string(output_dim));
  }
  if (!data.inputs.allFinite() || !data.targets.allFinite()) {
    fail(ErrorCode::non_finite, "training data contains non-finite values");
  }
  if (config.epochs < 0) fail(ErrorCode::invalid_argument, "epochs must be >= 0");
  if (config.batch_size < 2) fail(ErrorCode::invalid_argument, "batch_size must be >= 2");
  if (config.validation) {
    if (config.validation->inputs.cols() != input_dim ||
        config.validation->targets.cols() != output_dim) {
      fail(ErrorCode::dimension_mismatch, "validation set dims do not match the model");
    }
  }
}

bool budget_exhausted(const TrainConfig& config, std::chrono::steady_clock::time_point started) {
  if (config.max_wall_seconds <= 0.0) return false;
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  return elapsed.count() >= config.max_wall_seconds;
}

}  // namespace hypervae::nn
