#include "hypervae/vae/vae.hpp"

#include "hypervae/error.hpp"
#include "hypervae/nn/losses.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace hypervae::vae {

namespace {

using nn::Matrix;

struct ForwardTrace {
  std::array<nn::HiddenBlockCache, 2> encoder;
  Matrix encoded;  // output of the second encoder block
  Matrix mu;
  Matrix logvar;
  Matrix sigma;
  Matrix z;
  std::array<nn::HiddenBlockCache, 2> decoder;
  Matrix decoded;  // input of the output layer
  Matrix output_pre;
  Matrix prediction;
};

void require_input(const VaeParameters& model, const Matrix& inputs) {
  if (inputs.cols() != model.arch.input_dim) {
    fail(ErrorCode::dimension_mismatch, "VAE expects " + std::to_string(model.arch.input_dim) +
                                            " input bands, got " + std::to_string(inputs.cols()));
  }
  if (!inputs.allFinite()) fail(ErrorCode::non_finite, "VAE input contains non-finite values");
}

Matrix output_activation(ModelKind kind, const Matrix& pre) {
  return kind == ModelKind::aphy ? nn::softplus(pre) : pre;
}

ForwardTrace train_forward(const VaeParameters& model, const Matrix& inputs,
                           const Matrix& epsilon) {
  require_input(model, inputs);
  if (epsilon.rows() != inputs.rows() || epsilon.cols() != model.arch.latent_dim) {
    fail(ErrorCode::dimension_mismatch, "epsilon must be batch x latent_dim");
  }
  ForwardTrace t;
  Matrix h = nn::hidden_forward(model.encoder[0], inputs, nn::Mode::train, &t.encoder[0]);
  t.encoded = nn::hidden_forward(model.encoder[1], h, nn::Mode::train, &t.encoder[1]);
  t.mu = nn::dense_forward(model.mean_head, t.encoded);
  t.logvar = nn::dense_forward(model.logvar_head, t.encoded);
  t.sigma = (0.5 * t.logvar.array()).exp().matrix();
  t.z = t.mu + t.sigma.cwiseProduct(epsilon);
  Matrix d = nn::hidden_forward(model.decoder[0], t.z, nn::Mode::train, &t.decoder[0]);
  t.decoded = nn::hidden_forward(model.decoder[1], d, nn::Mode::train, &t.decoder[1]);
  t.output_pre = nn::dense_forward(model.output_layer, t.decoded);
  t.prediction = output_activation(model.arch.kind, t.output_pre);
  return t;
}

Matrix to_output_units(ModelKind kind, Matrix prediction) {
  if (kind == ModelKind::chla) {
    prediction = prediction.unaryExpr([](double y) { return data::invert_log_chla(y); });
  }
  return prediction;
}

}  // namespace

std::string_view kind_name(ModelKind kind) { return kind == ModelKind::aphy ? "aphy" : "chla"; }

ModelKind parse_kind(std::string_view name) {
  if (name == "aphy") return ModelKind::aphy;
  if (name == "chla") return ModelKind::chla;
  fail(ErrorCode::invalid_argument, "unknown VAE kind '" + std::string(name) + "'");
}

Architecture table_architecture(ModelKind kind, int input_dim, int output_dim) {
  Architecture arch;
  arch.kind = kind;
  arch.input_dim = input_dim;
  arch.output_dim = output_dim;
  if (kind == ModelKind::aphy) {
    arch.encoder_hidden = {512, 1024};
    arch.latent_dim = 256;
    arch.decoder_hidden = {512, 1024};
  } else {
    arch.encoder_hidden = {256, 128};
    arch.latent_dim = 64;
    arch.decoder_hidden = {64, 64};
  }
  validate_architecture(arch);
  return arch;
}

void validate_architecture(const Architecture& arch) {
  const int dims[] = {arch.input_dim,         arch.encoder_hidden[0], arch.encoder_hidden[1],
                      arch.latent_dim,        arch.decoder_hidden[0], arch.decoder_hidden[1],
                      arch.output_dim};
  for (int d : dims) {
    if (d <= 0) fail(ErrorCode::invalid_argument, "VAE dims must be positive");
  }
  if (arch.kind == ModelKind::chla && arch.output_dim != 1) {
    fail(ErrorCode::invalid_argument, "chla VAE predicts one value; output_dim " +
                                          std::to_string(arch.output_dim) + " is invalid");
  }
}

VaeParameters build_vae(ModelKind kind, int input_dim, int output_dim, double kl_weight,
                        nn::Rng& rng) {
  return build_vae(table_architecture(kind, input_dim, output_dim), kl_weight, rng);
}

VaeParameters build_vae(const Architecture& arch, double kl_weight, nn::Rng& rng) {
  validate_architecture(arch);
  if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight)) {
    fail(ErrorCode::invalid_argument, "kl_weight must be finite and >= 0");
  }
  VaeParameters m;
  m.arch = arch;
  m.kl_weight = kl_weight;
  m.encoder[0] = nn::make_hidden_block(arch.input_dim, arch.encoder_hidden[0], rng);
  m.encoder[1] = nn::make_hidden_block(arch.encoder_hidden[0], arch.encoder_hidden[1], rng);
  m.mean_head = nn::make_dense(arch.encoder_hidden[1], arch.latent_dim, rng);
  m.logvar_head = nn::make_dense(arch.encoder_hidden[1], arch.latent_dim, rng);
  m.decoder[0] = nn::make_hidden_block(arch.latent_dim, arch.decoder_hidden[0], rng);
  m.decoder[1] = nn::make_hidden_block(arch.decoder_hidden[0], arch.decoder_hidden[1], rng);
  m.output_layer = nn::make_dense(arch.decoder_hidden[1], arch.output_dim, rng);
  return m;
}

nn::ParameterList parameter_list(VaeParameters& model) {
  nn::ParameterList out;
  for (auto& block : model.encoder) nn::append_parameters(out, block);
  nn::append_parameters(out, model.mean_head);
  nn::append_parameters(out, model.logvar_head);
  for (auto& block : model.decoder) nn::append_parameters(out, block);
  nn::append_parameters(out, model.output_layer);
  return out;
}

std::vector<std::string> parameter_names() {
  std::vector<std::string> names;
  auto block = [&](const std::string& prefix) {
    for (const char* leaf : {"weight", "bias", "gamma", "beta"}) names.push_back(prefix + "." + leaf);
  };
  block("encoder.0");
  block("encoder.1");
  for (const char* head : {"mean_head", "logvar_head"}) {
    names.push_back(std::string(head) + ".weight");
    names.push_back(std::string(head) + ".bias");
  }
  block("decoder.0");
  block("decoder.1");
  names.emplace_back("output.weight");
  names.emplace_back("output.bias");
  return names;
}

nn::ParameterList buffer_list(VaeParameters& model) {
  nn::ParameterList out;
  for (auto* block : {&model.encoder[0], &model.encoder[1], &model.decoder[0], &model.decoder[1]}) {
    out.push_back(nn::view(block->norm.running_mean));
    out.push_back(nn::view(block->norm.running_var));
  }
  return out;
}

std::vector<std::string> buffer_names() {
  std::vector<std::string> names;
  for (const char* prefix : {"encoder.0", "encoder.1", "decoder.0", "decoder.1"}) {
    names.push_back(std::string(prefix) + ".running_mean");
    names.push_back(std::string(prefix) + ".running_var");
  }
  return names;
}

Encoding encode(const VaeParameters& model, const Matrix& rrs_normalized) {
  require_input(model, rrs_normalized);
  Matrix h = nn::hidden_forward(model.encoder[0], rrs_normalized, nn::Mode::eval);
  h = nn::hidden_forward(model.encoder[1], h, nn::Mode::eval);
  return Encoding{nn::dense_forward(model.mean_head, h), nn::dense_forward(model.logvar_head, h)};
}

LatentSample reparameterize(const Matrix& mu, const Matrix& logvar, nn::Rng& rng) {
  return reparameterize_with(mu, logvar, nn::sample_standard_normal(rng, mu.rows(), mu.cols()));
}

LatentSample reparameterize_with(const Matrix& mu, const Matrix& logvar, const Matrix& epsilon) {
  if (mu.rows() != logvar.rows() || mu.cols() != logvar.cols() || mu.rows() != epsilon.rows() ||
      mu.cols() != epsilon.cols()) {
    fail(ErrorCode::dimension_mismatch, "reparameterize: mu, logvar and epsilon shapes differ");
  }
  LatentSample s{mu, logvar, Matrix(), epsilon};
  s.z = mu + (0.5 * logvar.array()).exp().matrix().cwiseProduct(epsilon);
  return s;
}

Matrix decode(const VaeParameters& model, const Matrix& z) {
  if (z.cols() != model.arch.latent_dim) {
    fail(ErrorCode::dimension_mismatch, "decode expects latent width " +
                                            std::to_string(model.arch.latent_dim) + ", got " +
                                            std::to_string(z.cols()));
  }
  Matrix d = nn::hidden_forward(model.decoder[0], z, nn::Mode::eval);
  d = nn::hidden_forward(model.decoder[1], d, nn::Mode::eval);
  return output_activation(model.arch.kind, nn::dense_forward(model.output_layer, d));
}

LossBreakdown vae_loss(const Matrix& prediction, const Matrix& target, const Matrix& mu,
                       const Matrix& logvar, double kl_weight) {
  LossBreakdown loss;
  loss.reconstruction = nn::l1_loss(prediction, target);
  loss.kl = nn::kl_std_normal(mu, logvar);
  loss.total = loss.reconstruction + kl_weight * loss.kl;
  return loss;
}

nn::ParameterList VaeGradients::list() {
  nn::ParameterList out;
  for (auto& g : encoder) nn::append_gradients(out, g);
  nn::append_gradients(out, mean_head);
  nn::append_gradients(out, logvar_head);
  for (auto& g : decoder) nn::append_gradients(out, g);
  nn::append_gradients(out, output_layer);
  return out;
}

TrainStep loss_and_gradients(const VaeParameters& model, const Matrix& inputs,
                             const Matrix& targets, const Matrix& epsilon) {
  ForwardTrace t = train_forward(model, inputs, epsilon);
  TrainStep step;
  step.loss = vae_loss(t.prediction, targets, t.mu, t.logvar, model.kl_weight);

  Matrix grad = nn::l1_loss_backward(t.prediction, targets);
  if (model.arch.kind == ModelKind::aphy) grad = nn::softplus_backward(t.output_pre, grad);
  VaeGradients& g = step.grads;
  g.output_layer = nn::dense_backward(model.output_layer, t.decoded, grad);
  g.decoder[1] = nn::hidden_backward(model.decoder[1], t.decoder[1], g.output_layer.input);
  g.decoder[0] = nn::hidden_backward(model.decoder[0], t.decoder[0], g.decoder[1].dense.input);
  const Matrix& grad_z = g.decoder[0].dense.input;

  const nn::KlGrads kl = nn::kl_std_normal_backward(t.mu, t.logvar);
  const Matrix grad_mu = grad_z + model.kl_weight * kl.mu;
  const Matrix grad_logvar =
      (0.5 * grad_z.array() * epsilon.array() * t.sigma.array()).matrix() +
      model.kl_weight * kl.logvar;
  g.mean_head = nn::dense_backward(model.mean_head, t.encoded, grad_mu);
  g.logvar_head = nn::dense_backward(model.logvar_head, t.encoded, grad_logvar);
  const Matrix grad_encoded = g.mean_head.input + g.logvar_head.input;
  g.encoder[1] = nn::hidden_backward(model.encoder[1], t.encoder[1], grad_encoded);
  g.encoder[0] = nn::hidden_backward(model.encoder[0], t.encoder[0], g.encoder[1].dense.input,
                                     /*want_input_grad=*/false);

  step.norm_stats = {std::move(t.encoder[0].norm), std::move(t.encoder[1].norm),
                     std::move(t.decoder[0].norm), std::move(t.decoder[1].norm)};
  return step;
}

LossBreakdown train_mode_loss(const VaeParameters& model, const Matrix& inputs,
                              const Matrix& targets, const Matrix& epsilon) {
  const ForwardTrace t = train_forward(model, inputs, epsilon);
  return vae_loss(t.prediction, targets, t.mu, t.logvar, model.kl_weight);
}

LossBreakdown eval_loss(const VaeParameters& model, const Matrix& inputs, const Matrix& targets) {
  const Encoding enc = encode(model, inputs);
  return vae_loss(decode(model, enc.mu), targets, enc.mu, enc.logvar, model.kl_weight);
}

TrainResult train_vae(const VaeParameters& model, const nn::TensorDataset& train,
                      const nn::TrainConfig& config) {
  validate_architecture(model.arch);
  nn::validate_train_inputs(train, config, model.arch.input_dim, model.arch.output_dim);
  TrainResult result{model, {}};
  if (config.epochs == 0) return result;

  const auto started = std::chrono::steady_clock::now();
  VaeParameters current = model;
  nn::Rng rng(config.seed);
  nn::AdamState adam(config.adam);
  double best = std::numeric_limits<double>::infinity();
  nn::TrainHistory& history = result.history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0, recon = 0.0, kl = 0.0;
    for (const auto& rows : nn::epoch_batches(train.size(), config.batch_size, rng)) {
      const Matrix x = nn::gather_rows(train.inputs, rows);
      const Matrix y = nn::gather_rows(train.targets, rows);
      const Matrix eps = nn::sample_standard_normal(rng, x.rows(), current.arch.latent_dim);
      TrainStep step = loss_and_gradients(current, x, y, eps);
      nn::batchnorm_update_running(current.encoder[0].norm, step.norm_stats[0]);
      nn::batchnorm_update_running(current.encoder[1].norm, step.norm_stats[1]);
      nn::batchnorm_update_running(current.decoder[0].norm, step.norm_stats[2]);
      nn::batchnorm_update_running(current.decoder[1].norm, step.norm_stats[3]);
      nn::adam_step(adam, parameter_list(current), nn::as_const(step.grads.list()));

      const double weight = static_cast<double>(rows.size());
      total += weight * step.loss.total;
      recon += weight * step.loss.reconstruction;
      kl += weight * step.loss.kl;
    }
    const double n = static_cast<double>(train.size());
    history.total_loss.push_back(total / n);
    history.reconstruction_loss.push_back(recon / n);
    history.kl_loss.push_back(kl / n);
    const double selection = config.validation
                                 ? eval_loss(current, config.validation->inputs,
                                             config.validation->targets)
                                       .total
                                 : total / n;
    history.selection_loss.push_back(selection);
    if (selection < best) {
      best = selection;
      history.best_epoch = static_cast<std::size_t>(epoch);
      result.model = current;
    }
    if (nn::budget_exhausted(config, started)) break;
  }
  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

Matrix prepare_inputs(const VaeParameters& model, const Matrix& rrs) {
  if (!model.normalization) {
    fail(ErrorCode::untrained_model, "model has no normalization parameters attached");
  }
  require_input(model, rrs);
  return data::apply_normalization(rrs, *model.normalization);
}

Matrix prepare_targets(ModelKind kind, const Matrix& targets) {
  if (kind == ModelKind::aphy) return targets;
  return targets.unaryExpr([](double c) { return data::log_transform_chla(c); });
}

Matrix predict(const VaeParameters& model, const Matrix& rrs, nn::Rng& rng) {
  const Encoding enc = encode(model, prepare_inputs(model, rrs));
  const LatentSample s = reparameterize(enc.mu, enc.logvar, rng);
  return to_output_units(model.arch.kind, decode(model, s.z));
}

EnsemblePrediction predict_ensemble(const VaeParameters& model, const Matrix& rrs, int n,
                                    nn::Rng& rng) {
  if (n < 1) fail(ErrorCode::invalid_argument, "ensemble size must be >= 1");
  const Encoding enc = encode(model, prepare_inputs(model, rrs));
  EnsemblePrediction out;
  out.draws.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const LatentSample s = reparameterize(enc.mu, enc.logvar, rng);
    out.draws.push_back(to_output_units(model.arch.kind, decode(model, s.z)));
  }
  const Eigen::Index rows = out.draws.front().rows();
  const Eigen::Index cols = out.draws.front().cols();
  out.mean = Matrix::Zero(rows, cols);
  for (const auto& d : out.draws) out.mean += d;
  out.mean /= static_cast<double>(n);
  Matrix var = Matrix::Zero(rows, cols);
  for (const auto& d : out.draws) var += (d - out.mean).array().square().matrix();
  out.std = (var / static_cast<double>(n)).array().sqrt().matrix();
  return out;
}

}  // namespace hypervae::vae
