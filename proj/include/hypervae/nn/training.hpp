#pragma once

#include "hypervae/nn/adam.hpp"
#include "hypervae/nn/rng.hpp"
#include "hypervae/nn/tensor.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hypervae::nn {

/// Model-ready pairs: normalized inputs and transformed targets, one row per
/// sample.
struct TensorDataset {
  Matrix inputs;
  Matrix targets;

  Eigen::Index size() const { return inputs.rows(); }
};

struct TrainConfig {
  int epochs = 2000;
  int batch_size = 64;
  AdamConfig adam{};
  std::uint64_t seed = 0;
  // When present, best-epoch selection uses the loss on this set.
  std::optional<TensorDataset> validation;
  // Wall-clock cap in seconds; 0 disables it. Training stops after the epoch
  // that crosses the cap, so history.epochs() may fall short of `epochs`.
  double max_wall_seconds = 0.0;
};

struct TrainHistory {
  std::vector<double> total_loss;
  std::vector<double> reconstruction_loss;
  std::vector<double> kl_loss;
  std::vector<double> selection_loss;  // the value best_epoch minimizes
  std::optional<std::size_t> best_epoch;
  double wall_seconds = 0.0;

  std::size_t epochs() const { return total_loss.size(); }
  /// One row per epoch; wall time is deliberately not part of the table.
  std::string to_csv() const;
};

/// Shuffled minibatch index ranges for one epoch. A trailing batch of a
/// single sample is merged into its predecessor so that every batch can be
/// normalized with batch statistics.
std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index n_samples, int batch_size,
                                                     Rng& rng);

Matrix gather_rows(const Matrix& source, const std::vector<Eigen::Index>& rows);

/// True once `config.max_wall_seconds` (if set) has elapsed since `started`.
bool budget_exhausted(const TrainConfig& config, std::chrono::steady_clock::time_point started);

void validate_train_inputs(const TensorDataset& data, const TrainConfig& config,
                           Eigen::Index input_dim, Eigen::Index output_dim);

}  // namespace hypervae::nn
