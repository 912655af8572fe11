#pragma once

#include "hypervae/data/grid.hpp"
#include "hypervae/data/normalization.hpp"
#include "hypervae/nn/layers.hpp"
#include "hypervae/nn/training.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace hypervae::vae {

/// aphy: spectrum-to-spectrum with a Softplus output.
/// chla: spectrum-to-scalar; linear output in log10(ug/L) space.
enum class ModelKind { aphy, chla };

std::string_view kind_name(ModelKind kind);
ModelKind parse_kind(std::string_view name);

struct Architecture {
  ModelKind kind = ModelKind::aphy;
  int input_dim = 0;
  std::array<int, 2> encoder_hidden{};
  int latent_dim = 0;
  std::array<int, 2> decoder_hidden{};
  int output_dim = 0;
};

/// Reference layer widths:
///   aphy  encoder in->512->1024, heads 1024->256, decoder 256->512->1024->out
///   chla  encoder in->256->128,  heads 128->64,   decoder 64->64->64->1
Architecture table_architecture(ModelKind kind, int input_dim, int output_dim);

/// Throws on non-positive widths or a chla model whose output is not scalar.
void validate_architecture(const Architecture& arch);

struct VaeParameters {
  Architecture arch;
  std::array<nn::HiddenBlock, 2> encoder;
  nn::DenseLayer mean_head;
  nn::DenseLayer logvar_head;
  std::array<nn::HiddenBlock, 2> decoder;
  nn::DenseLayer output_layer;
  double kl_weight = 1e-3;
  // Attached by the training pipeline; required for predict().
  std::optional<data::NormalizationParams> normalization;
  std::optional<data::SpectralGrid> grid;
};

/// Trainable tensors in checkpoint order: encoder.{0,1}.{weight,bias,gamma,beta},
/// mean_head.{weight,bias}, logvar_head.{weight,bias},
/// decoder.{0,1}.{weight,bias,gamma,beta}, output.{weight,bias}.
nn::ParameterList parameter_list(VaeParameters& model);
std::vector<std::string> parameter_names();

/// Batch-norm running statistics, same block order as parameter_list:
/// encoder.{0,1}.{running_mean,running_var}, decoder.{0,1}.{...}.
nn::ParameterList buffer_list(VaeParameters& model);
std::vector<std::string> buffer_names();

/// Table-conformant model with Kaiming-uniform dense layers and unit/zero
/// batch-norm affine parameters.
VaeParameters build_vae(ModelKind kind, int input_dim, int output_dim, double kl_weight,
                        nn::Rng& rng);
/// Same layer structure with caller-chosen widths (used for small gradient checks).
VaeParameters build_vae(const Architecture& arch, double kl_weight, nn::Rng& rng);

struct Encoding {
  nn::Matrix mu;
  nn::Matrix logvar;
};

/// Eval-mode encoder on already-normalized Rrs rows.
Encoding encode(const VaeParameters& model, const nn::Matrix& rrs_normalized);

/// z = mu + exp(logvar / 2) * epsilon, keeping epsilon for replay.
struct LatentSample {
  nn::Matrix mu;
  nn::Matrix logvar;
  nn::Matrix z;
  nn::Matrix epsilon;
};

LatentSample reparameterize(const nn::Matrix& mu, const nn::Matrix& logvar, nn::Rng& rng);
LatentSample reparameterize_with(const nn::Matrix& mu, const nn::Matrix& logvar,
                                 const nn::Matrix& epsilon);

/// Eval-mode decoder. aphy outputs are strictly positive; chla outputs are
/// log10 concentrations.
nn::Matrix decode(const VaeParameters& model, const nn::Matrix& z);

struct LossBreakdown {
  double total = 0.0;
  double reconstruction = 0.0;
  double kl = 0.0;
};

/// total = l1_loss(prediction, target) + kl_weight * kl_std_normal(mu, logvar)
LossBreakdown vae_loss(const nn::Matrix& prediction, const nn::Matrix& target,
                       const nn::Matrix& mu, const nn::Matrix& logvar, double kl_weight);

/// Gradients laid out exactly like parameter_list().
struct VaeGradients {
  std::array<nn::HiddenBlockGrads, 2> encoder;
  nn::DenseGrads mean_head;
  nn::DenseGrads logvar_head;
  std::array<nn::HiddenBlockGrads, 2> decoder;
  nn::DenseGrads output_layer;

  nn::ParameterList list();
};

struct TrainStep {
  LossBreakdown loss;
  VaeGradients grads;
  // Batch statistics of every batch-norm layer (encoder 0,1 then decoder 0,1).
  std::array<nn::BatchNormCache, 4> norm_stats;
};

/// Train-mode forward and backward pass with a fixed noise draw. The model is
/// not modified; running statistics are returned in `norm_stats`.
TrainStep loss_and_gradients(const VaeParameters& model, const nn::Matrix& inputs,
                             const nn::Matrix& targets, const nn::Matrix& epsilon);

/// Train-mode loss only, for finite-difference checks.
LossBreakdown train_mode_loss(const VaeParameters& model, const nn::Matrix& inputs,
                              const nn::Matrix& targets, const nn::Matrix& epsilon);

/// Eval-mode loss with z = mu; used for validation-based epoch selection.
LossBreakdown eval_loss(const VaeParameters& model, const nn::Matrix& inputs,
                        const nn::Matrix& targets);

struct TrainResult {
  VaeParameters model;  // parameters of the best epoch
  nn::TrainHistory history;
};

/// Minibatch Adam on vae_loss. The returned model is the snapshot of the
/// epoch with the lowest selection loss (validation loss when configured,
/// otherwise the epoch's mean training loss). Zero epochs returns the input.
TrainResult train_vae(const VaeParameters& model, const nn::TensorDataset& train,
                      const nn::TrainConfig& config);

/// Raw Rrs rows (grid units) to model-ready inputs via the attached
/// normalization.
nn::Matrix prepare_inputs(const VaeParameters& model, const nn::Matrix& rrs);
/// aphy targets stay in m^-1; chla targets become log10.
nn::Matrix prepare_targets(ModelKind kind, const nn::Matrix& targets);

/// One stochastic draw: encode -> reparameterize -> decode -> inverse
/// transforms. Returns aphy in m^-1 or chla in ug/L.
nn::Matrix predict(const VaeParameters& model, const nn::Matrix& rrs, nn::Rng& rng);

struct EnsemblePrediction {
  std::vector<nn::Matrix> draws;
  nn::Matrix mean;
  nn::Matrix std;  // population standard deviation over draws
};

EnsemblePrediction predict_ensemble(const VaeParameters& model, const nn::Matrix& rrs, int n,
                                    nn::Rng& rng);

}  // namespace hypervae::vae
