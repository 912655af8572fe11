#pragma once

#include "hypervae/data/grid.hpp"
#include "hypervae/data/normalization.hpp"
#include "hypervae/data/samples.hpp"
#include "hypervae/mdn/mdn.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypervae::app {

enum class ModelType { vae, mdn };

std::string_view model_type_name(ModelType type);
ModelType parse_model_type(std::string_view name);

/// Everything that determines a run. Sources, lowest precedence first:
/// built-in defaults, a JSON config file, HYPERVAE_<KEY> environment
/// variables, then command-line flags (--<key> with '_' spelled '-').
struct RunConfig {
  data::Mission mission = data::Mission::pace;
  data::TargetSchema task = data::TargetSchema::aphy;
  ModelType model = ModelType::vae;
  std::optional<std::uint64_t> seed;

  int epochs = 2000;
  double learning_rate = 1e-3;
  int batch_size = 64;
  double kl_weight = 1e-3;
  double train_fraction = 0.7;
  double qc_max_roughness = 0.5;
  data::NormalizationGranularity normalization = data::NormalizationGranularity::per_band;
  int n_components = 5;
  mdn::PredictionMode mdn_mode = mdn::PredictionMode::highest_weight;
  int ensemble_n = 1;

  std::filesystem::path dataset;      // input CSV (raw for preprocess, canonical otherwise)
  std::filesystem::path checkpoint;   // default <output_dir>/model.ckpt
  std::filesystem::path output_dir = ".";
  std::filesystem::path predictions;  // default <output_dir>/predictions.csv
  std::filesystem::path truth;        // optional ground-truth dataset for evaluate/sweep
  std::string split;                  // predict only this split label; empty = all rows

  // gen-synthetic
  std::string synthetic_kind = "one_to_many";  // one_to_many | paired
  int synthetic_count = 16;  // Rrs shapes (one_to_many) or samples (paired)
  int synthetic_modes = 2;

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path predictions_path() const;
};

/// Config keys in declaration order; each is also a JSON field, an
/// environment variable suffix and a CLI flag.
const std::vector<std::string>& config_keys();

/// Sets one field from its textual form; unknown keys and malformed values
/// raise CONFIG_ERROR.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Full snapshot, every key present (seed is null when unset).
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(std::string_view text);

/// Applies HYPERVAE_<UPPER_KEY> variables found by `lookup`.
using EnvLookup = std::optional<std::string> (*)(const char* name);
void apply_environment(RunConfig& config, EnvLookup lookup);
std::optional<std::string> process_env(const char* name);

/// defaults <- config file (if given) <- environment <- explicit overrides.
RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& overrides,
                         EnvLookup lookup = process_env);

/// Cross-field checks: fractions in (0, 1), positive counts and rates.
void validate_config(const RunConfig& config);

std::uint64_t require_seed(const RunConfig& config, std::string_view command);

}  // namespace hypervae::app
