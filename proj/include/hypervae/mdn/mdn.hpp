#pragma once

#include "hypervae/data/grid.hpp"
#include "hypervae/data/normalization.hpp"
#include "hypervae/nn/layers.hpp"
#include "hypervae/nn/training.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypervae::mdn {

inline constexpr double variance_floor = 1e-8;

/// What the regression targets are: aphy spectra or a single chla value.
/// Both are modelled in log10 space and returned in physical units.
enum class TargetKind { aphy, chla };

std::string_view target_name(TargetKind kind);
TargetKind parse_target(std::string_view name);

struct MdnArchitecture {
  TargetKind target = TargetKind::aphy;
  int input_dim = 0;
  int output_dim = 0;
  int n_components = 5;
  std::vector<int> hidden{100, 100, 100, 100, 100};
};

/// Trunk of Dense -> BatchNorm -> LeakyReLU(0.2) blocks, then three linear
/// heads: component logits (K), means (K * D) and log-variances (K * D).
struct MdnParameters {
  MdnArchitecture arch;
  std::vector<nn::HiddenBlock> trunk;
  nn::DenseLayer logit_head;
  nn::DenseLayer mean_head;
  nn::DenseLayer logvar_head;
  std::optional<data::NormalizationParams> normalization;
  std::optional<data::SpectralGrid> grid;
};

/// trunk.<i>.{weight,bias,gamma,beta}..., logit_head.{weight,bias},
/// mean_head.{...}, logvar_head.{...}
nn::ParameterList parameter_list(MdnParameters& model);
std::vector<std::string> parameter_names(const MdnArchitecture& arch);
/// trunk.<i>.{running_mean,running_var}
nn::ParameterList buffer_list(MdnParameters& model);
std::vector<std::string> buffer_names(const MdnArchitecture& arch);

MdnParameters build_mdn(int input_dim, int output_dim, int n_components, nn::Rng& rng,
                        TargetKind target = TargetKind::aphy);
MdnParameters build_mdn(const MdnArchitecture& arch, nn::Rng& rng);

/// One conditional Gaussian mixture with diagonal covariance.
struct MixtureOutput {
  nn::RowVector weights;  // K, on the simplex
  nn::Matrix means;       // K x D
  nn::Matrix variances;   // K x D, >= variance_floor
};

/// Head outputs for a batch before the per-row split.
struct MixtureBatch {
  nn::Matrix logits;   // B x K
  nn::Matrix means;    // B x (K * D), component-major
  nn::Matrix logvars;  // B x (K * D)
};

std::vector<MixtureOutput> to_mixtures(const MixtureBatch& batch, int n_components);

/// Eval-mode forward on normalized inputs.
std::vector<MixtureOutput> mdn_forward(const MdnParameters& model, const nn::Matrix& inputs);

/// Batch mean of -log sum_k w_k N(target; mean_k, diag(var_k)), evaluated
/// with log-sum-exp.
double mdn_nll(const std::vector<MixtureOutput>& mixtures, const nn::Matrix& targets);

struct MdnGradients {
  std::vector<nn::HiddenBlockGrads> trunk;
  nn::DenseGrads logit_head;
  nn::DenseGrads mean_head;
  nn::DenseGrads logvar_head;

  nn::ParameterList list();
};

struct MdnTrainStep {
  double nll = 0.0;
  MdnGradients grads;
  std::vector<nn::BatchNormCache> norm_stats;
};

MdnTrainStep nll_and_gradients(const MdnParameters& model, const nn::Matrix& inputs,
                               const nn::Matrix& targets);
double train_mode_nll(const MdnParameters& model, const nn::Matrix& inputs,
                      const nn::Matrix& targets);

struct MdnTrainResult {
  MdnParameters model;
  nn::TrainHistory history;  // reconstruction_loss holds the NLL, kl_loss is 0
};

/// Minibatch Adam on mdn_nll with best-epoch retention (validation NLL when a
/// validation set is configured, else the epoch's training NLL).
MdnTrainResult train_mdn(const MdnParameters& model, const nn::TensorDataset& train,
                         const nn::TrainConfig& config);

/// Mean of the highest-weighted component; ties go to the lowest index.
nn::RowVector predict_highest_weight(const MixtureOutput& mix);
/// sum_k w_k mean_k
nn::RowVector predict_weighted_mean(const MixtureOutput& mix);
/// M-MDN: draw k ~ weights, then a draw from N(mean_k, diag(var_k)).
nn::RowVector predict_sample(const MixtureOutput& mix, nn::Rng& rng);

enum class PredictionMode { highest_weight, weighted_mean, sample };

std::string_view mode_name(PredictionMode mode);
PredictionMode parse_mode(std::string_view name);

nn::Matrix prepare_inputs(const MdnParameters& model, const nn::Matrix& rrs);
/// Targets in physical units to log10 space.
nn::Matrix prepare_targets(const nn::Matrix& targets);

/// Raw Rrs rows in, physical-unit predictions out (10^ of the mixture value).
nn::Matrix predict(const MdnParameters& model, const nn::Matrix& rrs, PredictionMode mode,
                   nn::Rng& rng);

}  // namespace hypervae::mdn
