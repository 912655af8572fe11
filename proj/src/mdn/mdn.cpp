#include "hypervae/mdn/mdn.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace hypervae::mdn {

namespace {

using nn::Matrix;
using nn::RowVector;

const double log_two_pi = std::log(2.0 * std::numbers::pi);
const double log_variance_floor = std::log(variance_floor);

double log_sum_exp(const double* v, Eigen::Index n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) hi = std::max(hi, v[i]);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::exp(v[i] - hi);
  return hi + std::log(s);
}

// log w_k + log N(y; mean_k, diag var_k) for every component of one row.
// `means` and `log_vars` point at K * D component-major values.
void component_log_probs(const double* log_weights, const double* means, const double* log_vars,
                         const double* y, int k_count, int dim, double* out) {
  for (int k = 0; k < k_count; ++k) {
    double lp = log_weights[k];
    for (int d = 0; d < dim; ++d) {
      const double lv = std::max(log_vars[k * dim + d], log_variance_floor);
      const double r = y[d] - means[k * dim + d];
      lp -= 0.5 * (log_two_pi + lv + r * r * std::exp(-lv));
    }
    out[k] = lp;
  }
}

struct Trace {
  std::vector<nn::HiddenBlockCache> trunk;
  Matrix features;
  MixtureBatch heads;
};

void require_input(const MdnParameters& model, const Matrix& inputs) {
  if (inputs.cols() != model.arch.input_dim) {
    fail(ErrorCode::dimension_mismatch, "MDN expects " + std::to_string(model.arch.input_dim) +
                                            " input bands, got " + std::to_string(inputs.cols()));
  }
  if (!inputs.allFinite()) fail(ErrorCode::non_finite, "MDN input contains non-finite values");
}

Trace forward(const MdnParameters& model, const Matrix& inputs, nn::Mode mode) {
  require_input(model, inputs);
  Trace t;
  t.trunk.resize(model.trunk.size());
  Matrix h = inputs;
  for (std::size_t i = 0; i < model.trunk.size(); ++i) {
    h = nn::hidden_forward(model.trunk[i], h, mode,
                           mode == nn::Mode::train ? &t.trunk[i] : nullptr);
  }
  t.heads.logits = nn::dense_forward(model.logit_head, h);
  t.heads.means = nn::dense_forward(model.mean_head, h);
  t.heads.logvars = nn::dense_forward(model.logvar_head, h);
  t.features = std::move(h);
  return t;
}

void require_targets(const Matrix& targets, Eigen::Index rows, int dim) {
  if (targets.rows() != rows || targets.cols() != dim) {
    fail(ErrorCode::dimension_mismatch, "MDN targets must be " + std::to_string(rows) + "x" +
                                            std::to_string(dim) + ", got " +
                                            std::to_string(targets.rows()) + "x" +
                                            std::to_string(targets.cols()));
  }
}

}  // namespace

std::string_view target_name(TargetKind kind) { return kind == TargetKind::aphy ? "aphy" : "chla"; }

TargetKind parse_target(std::string_view name) {
  if (name == "aphy") return TargetKind::aphy;
  if (name == "chla") return TargetKind::chla;
  fail(ErrorCode::invalid_argument, "unknown MDN target '" + std::string(name) + "'");
}

MdnParameters build_mdn(int input_dim, int output_dim, int n_components, nn::Rng& rng,
                        TargetKind target) {
  MdnArchitecture arch;
  arch.target = target;
  arch.input_dim = input_dim;
  arch.output_dim = output_dim;
  arch.n_components = n_components;
  return build_mdn(arch, rng);
}

MdnParameters build_mdn(const MdnArchitecture& arch, nn::Rng& rng) {
  if (arch.input_dim <= 0 || arch.output_dim <= 0) {
    fail(ErrorCode::invalid_argument, "MDN dims must be positive");
  }
  if (arch.n_components < 1) {
    fail(ErrorCode::invalid_argument, "MDN needs at least one component, got " +
                                          std::to_string(arch.n_components));
  }
  if (arch.hidden.empty()) fail(ErrorCode::invalid_argument, "MDN trunk needs a hidden layer");
  if (arch.target == TargetKind::chla && arch.output_dim != 1) {
    fail(ErrorCode::invalid_argument, "chla MDN predicts one value");
  }
  MdnParameters m;
  m.arch = arch;
  int width = arch.input_dim;
  for (int h : arch.hidden) {
    if (h <= 0) fail(ErrorCode::invalid_argument, "MDN hidden widths must be positive");
    m.trunk.push_back(nn::make_hidden_block(width, h, rng));
    width = h;
  }
  const int kd = arch.n_components * arch.output_dim;
  m.logit_head = nn::make_dense(width, arch.n_components, rng);
  m.mean_head = nn::make_dense(width, kd, rng);
  m.logvar_head = nn::make_dense(width, kd, rng);
  return m;
}

nn::ParameterList parameter_list(MdnParameters& model) {
  nn::ParameterList out;
  for (auto& block : model.trunk) nn::append_parameters(out, block);
  nn::append_parameters(out, model.logit_head);
  nn::append_parameters(out, model.mean_head);
  nn::append_parameters(out, model.logvar_head);
  return out;
}

std::vector<std::string> parameter_names(const MdnArchitecture& arch) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    for (const char* leaf : {"weight", "bias", "gamma", "beta"}) {
      names.push_back("trunk." + std::to_string(i) + "." + leaf);
    }
  }
  for (const char* head : {"logit_head", "mean_head", "logvar_head"}) {
    names.push_back(std::string(head) + ".weight");
    names.push_back(std::string(head) + ".bias");
  }
  return names;
}

nn::ParameterList buffer_list(MdnParameters& model) {
  nn::ParameterList out;
  for (auto& block : model.trunk) {
    out.push_back(nn::view(block.norm.running_mean));
    out.push_back(nn::view(block.norm.running_var));
  }
  return out;
}

std::vector<std::string> buffer_names(const MdnArchitecture& arch) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    names.push_back("trunk." + std::to_string(i) + ".running_mean");
    names.push_back("trunk." + std::to_string(i) + ".running_var");
  }
  return names;
}

std::vector<MixtureOutput> to_mixtures(const MixtureBatch& batch, int n_components) {
  const Eigen::Index rows = batch.logits.rows();
  const int dim = static_cast<int>(batch.means.cols()) / n_components;
  std::vector<MixtureOutput> out(static_cast<std::size_t>(rows));
  for (Eigen::Index b = 0; b < rows; ++b) {
    MixtureOutput& mix = out[static_cast<std::size_t>(b)];
    const double lse = log_sum_exp(batch.logits.row(b).data(), n_components);
    mix.weights = (batch.logits.row(b).array() - lse).exp().matrix();
    mix.means.resize(n_components, dim);
    mix.variances.resize(n_components, dim);
    for (int k = 0; k < n_components; ++k) {
      for (int d = 0; d < dim; ++d) {
        mix.means(k, d) = batch.means(b, k * dim + d);
        mix.variances(k, d) = std::max(std::exp(batch.logvars(b, k * dim + d)), variance_floor);
      }
    }
  }
  return out;
}

std::vector<MixtureOutput> mdn_forward(const MdnParameters& model, const Matrix& inputs) {
  return to_mixtures(forward(model, inputs, nn::Mode::eval).heads, model.arch.n_components);
}

double mdn_nll(const std::vector<MixtureOutput>& mixtures, const Matrix& targets) {
  if (mixtures.empty()) fail(ErrorCode::invalid_argument, "mdn_nll: no mixtures");
  const int k_count = static_cast<int>(mixtures.front().weights.size());
  const int dim = static_cast<int>(mixtures.front().means.cols());
  require_targets(targets, static_cast<Eigen::Index>(mixtures.size()), dim);
  std::vector<double> log_w(static_cast<std::size_t>(k_count));
  std::vector<double> lp(static_cast<std::size_t>(k_count));
  double total = 0.0;
  for (std::size_t b = 0; b < mixtures.size(); ++b) {
    const MixtureOutput& mix = mixtures[b];
    const Matrix log_var = mix.variances.array().log().matrix();
    for (int k = 0; k < k_count; ++k) log_w[static_cast<std::size_t>(k)] = std::log(mix.weights[k]);
    const RowVector y = targets.row(static_cast<Eigen::Index>(b));
    component_log_probs(log_w.data(), mix.means.data(), log_var.data(), y.data(), k_count, dim,
                        lp.data());
    total -= log_sum_exp(lp.data(), k_count);
  }
  return total / static_cast<double>(mixtures.size());
}

nn::ParameterList MdnGradients::list() {
  nn::ParameterList out;
  for (auto& g : trunk) nn::append_gradients(out, g);
  nn::append_gradients(out, logit_head);
  nn::append_gradients(out, mean_head);
  nn::append_gradients(out, logvar_head);
  return out;
}

MdnTrainStep nll_and_gradients(const MdnParameters& model, const Matrix& inputs,
                               const Matrix& targets) {
  Trace t = forward(model, inputs, nn::Mode::train);
  const int k_count = model.arch.n_components;
  const int dim = model.arch.output_dim;
  const Eigen::Index batch = inputs.rows();
  require_targets(targets, batch, dim);
  const double inv_batch = 1.0 / static_cast<double>(batch);

  Matrix grad_logits(batch, k_count);
  Matrix grad_means(batch, k_count * dim);
  Matrix grad_logvars(batch, k_count * dim);
  std::vector<double> log_w(static_cast<std::size_t>(k_count));
  std::vector<double> lp(static_cast<std::size_t>(k_count));
  MdnTrainStep step;

  for (Eigen::Index b = 0; b < batch; ++b) {
    const double* logits = t.heads.logits.row(b).data();
    const double lse_w = log_sum_exp(logits, k_count);
    for (int k = 0; k < k_count; ++k) log_w[static_cast<std::size_t>(k)] = logits[k] - lse_w;
    const double* means = t.heads.means.row(b).data();
    const double* logvars = t.heads.logvars.row(b).data();
    const double* y = targets.row(b).data();
    component_log_probs(log_w.data(), means, logvars, y, k_count, dim, lp.data());
    const double lse = log_sum_exp(lp.data(), k_count);
    step.nll -= lse;
    for (int k = 0; k < k_count; ++k) {
      const double resp = std::exp(lp[static_cast<std::size_t>(k)] - lse);
      const double weight = std::exp(log_w[static_cast<std::size_t>(k)]);
      grad_logits(b, k) = (weight - resp) * inv_batch;
      for (int d = 0; d < dim; ++d) {
        const int j = k * dim + d;
        const bool floored = logvars[j] < log_variance_floor;
        const double inv_var = std::exp(-std::max(logvars[j], log_variance_floor));
        const double r = means[j] - y[d];
        grad_means(b, j) = resp * r * inv_var * inv_batch;
        grad_logvars(b, j) = floored ? 0.0 : 0.5 * resp * (1.0 - r * r * inv_var) * inv_batch;
      }
    }
  }
  step.nll *= inv_batch;

  MdnGradients& g = step.grads;
  g.logit_head = nn::dense_backward(model.logit_head, t.features, grad_logits);
  g.mean_head = nn::dense_backward(model.mean_head, t.features, grad_means);
  g.logvar_head = nn::dense_backward(model.logvar_head, t.features, grad_logvars);
  Matrix grad = g.logit_head.input + g.mean_head.input + g.logvar_head.input;
  g.trunk.resize(model.trunk.size());
  for (std::size_t i = model.trunk.size(); i-- > 0;) {
    g.trunk[i] = nn::hidden_backward(model.trunk[i], t.trunk[i], grad, /*want_input_grad=*/i > 0);
    if (i > 0) grad = g.trunk[i].dense.input;
  }
  for (auto& cache : t.trunk) step.norm_stats.push_back(std::move(cache.norm));
  return step;
}

double train_mode_nll(const MdnParameters& model, const Matrix& inputs, const Matrix& targets) {
  const Trace t = forward(model, inputs, nn::Mode::train);
  return mdn_nll(to_mixtures(t.heads, model.arch.n_components), targets);
}

MdnTrainResult train_mdn(const MdnParameters& model, const nn::TensorDataset& train,
                         const nn::TrainConfig& config) {
  nn::validate_train_inputs(train, config, model.arch.input_dim, model.arch.output_dim);
  MdnTrainResult result{model, {}};
  if (config.epochs == 0) return result;

  const auto started = std::chrono::steady_clock::now();
  MdnParameters current = model;
  nn::Rng rng(config.seed);
  nn::AdamState adam(config.adam);
  double best = std::numeric_limits<double>::infinity();
  nn::TrainHistory& history = result.history;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& rows : nn::epoch_batches(train.size(), config.batch_size, rng)) {
      const Matrix x = nn::gather_rows(train.inputs, rows);
      const Matrix y = nn::gather_rows(train.targets, rows);
      MdnTrainStep step = nll_and_gradients(current, x, y);
      for (std::size_t i = 0; i < current.trunk.size(); ++i) {
        nn::batchnorm_update_running(current.trunk[i].norm, step.norm_stats[i]);
      }
      nn::adam_step(adam, parameter_list(current), nn::as_const(step.grads.list()));
      total += static_cast<double>(rows.size()) * step.nll;
    }
    const double mean_nll = total / static_cast<double>(train.size());
    history.total_loss.push_back(mean_nll);
    history.reconstruction_loss.push_back(mean_nll);
    history.kl_loss.push_back(0.0);
    const double selection =
        config.validation
            ? mdn_nll(mdn_forward(current, config.validation->inputs), config.validation->targets)
            : mean_nll;
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

RowVector predict_highest_weight(const MixtureOutput& mix) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < mix.weights.size(); ++k) {
    if (mix.weights[k] > mix.weights[best]) best = k;
  }
  return mix.means.row(best);
}

RowVector predict_weighted_mean(const MixtureOutput& mix) { return mix.weights * mix.means; }

RowVector predict_sample(const MixtureOutput& mix, nn::Rng& rng) {
  const double u = rng.uniform();
  Eigen::Index k = 0;
  double cumulative = mix.weights[0];
  while (u >= cumulative && k + 1 < mix.weights.size()) {
    ++k;
    cumulative += mix.weights[k];
  }
  RowVector out(mix.means.cols());
  for (Eigen::Index d = 0; d < out.size(); ++d) {
    out[d] = mix.means(k, d) + std::sqrt(mix.variances(k, d)) * rng.normal();
  }
  return out;
}

std::string_view mode_name(PredictionMode mode) {
  switch (mode) {
    case PredictionMode::highest_weight: return "highest_weight";
    case PredictionMode::weighted_mean: return "weighted_mean";
    case PredictionMode::sample: return "sample";
  }
  return "highest_weight";
}

PredictionMode parse_mode(std::string_view name) {
  if (name == "highest_weight") return PredictionMode::highest_weight;
  if (name == "weighted_mean") return PredictionMode::weighted_mean;
  if (name == "sample") return PredictionMode::sample;
  fail(ErrorCode::invalid_argument, "unknown MDN prediction mode '" + std::string(name) + "'");
}

Matrix prepare_inputs(const MdnParameters& model, const Matrix& rrs) {
  if (!model.normalization) {
    fail(ErrorCode::untrained_model, "model has no normalization parameters attached");
  }
  require_input(model, rrs);
  return data::apply_normalization(rrs, *model.normalization);
}

Matrix prepare_targets(const Matrix& targets) {
  return targets.unaryExpr([](double v) {
    if (!(v > 0.0)) fail(ErrorCode::domain_error, "MDN targets must be positive for log10");
    return std::log10(v);
  });
}

Matrix predict(const MdnParameters& model, const Matrix& rrs, PredictionMode mode, nn::Rng& rng) {
  const auto mixtures = mdn_forward(model, prepare_inputs(model, rrs));
  Matrix out(static_cast<Eigen::Index>(mixtures.size()), model.arch.output_dim);
  for (std::size_t b = 0; b < mixtures.size(); ++b) {
    RowVector row;
    switch (mode) {
      case PredictionMode::highest_weight: row = predict_highest_weight(mixtures[b]); break;
      case PredictionMode::weighted_mean: row = predict_weighted_mean(mixtures[b]); break;
      case PredictionMode::sample: row = predict_sample(mixtures[b], rng); break;
    }
    out.row(static_cast<Eigen::Index>(b)) = row.unaryExpr(&data::from_log10);
  }
  return out;
}

}  // namespace hypervae::mdn
