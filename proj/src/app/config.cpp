#include "hypervae/app/config.hpp"

#include "hypervae/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

namespace hypervae::app {
namespace {

using json = nlohmann::ordered_json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  fail(ErrorCode::config_error,
       "config '" + std::string(key) + "': '" + std::string(value) + "' is not " + std::string(what));
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "a number");
  return out;
}

// Re-raises enum parse failures as configuration errors.
template <typename F>
auto parse_enum(std::string_view key, std::string_view value, F&& parse) {
  try {
    return parse(lower(value));
  } catch (const Error&) {
    bad_value(key, value, "an accepted value");
  }
}

data::Mission parse_run_mission(std::string_view key, std::string_view value) {
  const auto m = parse_enum(key, value, [](const std::string& v) { return data::parse_mission(v); });
  if (m == data::Mission::custom) bad_value(key, value, "pace or emit");
  return m;
}

std::string granularity_name(data::NormalizationGranularity g) {
  return g == data::NormalizationGranularity::global ? "global" : "per_band";
}

}  // namespace

std::string_view model_type_name(ModelType type) { return type == ModelType::mdn ? "mdn" : "vae"; }

ModelType parse_model_type(std::string_view name) {
  if (name == "vae") return ModelType::vae;
  if (name == "mdn") return ModelType::mdn;
  fail(ErrorCode::invalid_argument, "unknown model type '" + std::string(name) + "'");
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir / "model.ckpt" : checkpoint;
}

std::filesystem::path RunConfig::predictions_path() const {
  return predictions.empty() ? output_dir / "predictions.csv" : predictions;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mission",         "task",          "model",           "seed",
      "epochs",          "learning_rate", "batch_size",      "kl_weight",
      "train_fraction",  "qc_max_roughness", "normalization", "n_components",
      "mdn_mode",        "ensemble_n",    "dataset",         "checkpoint",
      "output_dir",      "predictions",   "truth",           "split",
      "synthetic_kind",  "synthetic_count", "synthetic_modes"};
  return keys;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "mission") {
    c.mission = parse_run_mission(key, value);
  } else if (key == "task") {
    c.task = parse_enum(key, value, [](const std::string& v) { return data::parse_schema(v); });
  } else if (key == "model") {
    c.model = parse_enum(key, value, [](const std::string& v) { return parse_model_type(v); });
  } else if (key == "seed") {
    if (value.empty() || lower(value) == "null") {
      c.seed.reset();
    } else {
      c.seed = parse_integer<std::uint64_t>(key, value);
    }
  } else if (key == "epochs") {
    c.epochs = parse_integer<int>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_real(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_integer<int>(key, value);
  } else if (key == "kl_weight") {
    c.kl_weight = parse_real(key, value);
  } else if (key == "train_fraction") {
    c.train_fraction = parse_real(key, value);
  } else if (key == "qc_max_roughness") {
    c.qc_max_roughness = parse_real(key, value);
  } else if (key == "normalization") {
    const auto v = lower(value);
    if (v == "per_band") {
      c.normalization = data::NormalizationGranularity::per_band;
    } else if (v == "global") {
      c.normalization = data::NormalizationGranularity::global;
    } else {
      bad_value(key, value, "per_band or global");
    }
  } else if (key == "n_components") {
    c.n_components = parse_integer<int>(key, value);
  } else if (key == "mdn_mode") {
    c.mdn_mode = parse_enum(key, value, [](const std::string& v) { return mdn::parse_mode(v); });
  } else if (key == "ensemble_n") {
    c.ensemble_n = parse_integer<int>(key, value);
  } else if (key == "dataset") {
    c.dataset = std::string(value);
  } else if (key == "checkpoint") {
    c.checkpoint = std::string(value);
  } else if (key == "output_dir") {
    c.output_dir = std::string(value);
  } else if (key == "predictions") {
    c.predictions = std::string(value);
  } else if (key == "truth") {
    c.truth = std::string(value);
  } else if (key == "split") {
    if (!value.empty()) data::parse_split(value);  // validate the label
    c.split = std::string(value);
  } else if (key == "synthetic_kind") {
    const auto v = lower(value);
    if (v != "one_to_many" && v != "paired") bad_value(key, value, "one_to_many or paired");
    c.synthetic_kind = v;
  } else if (key == "synthetic_count") {
    c.synthetic_count = parse_integer<int>(key, value);
  } else if (key == "synthetic_modes") {
    c.synthetic_modes = parse_integer<int>(key, value);
  } else {
    fail(ErrorCode::config_error, "unknown config key '" + std::string(key) + "'");
  }
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["mission"] = data::mission_name(c.mission);
  j["task"] = data::schema_name(c.task);
  j["model"] = model_type_name(c.model);
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["kl_weight"] = c.kl_weight;
  j["train_fraction"] = c.train_fraction;
  j["qc_max_roughness"] = c.qc_max_roughness;
  j["normalization"] = granularity_name(c.normalization);
  j["n_components"] = c.n_components;
  j["mdn_mode"] = mdn::mode_name(c.mdn_mode);
  j["ensemble_n"] = c.ensemble_n;
  j["dataset"] = c.dataset.generic_string();
  j["checkpoint"] = c.checkpoint.generic_string();
  j["output_dir"] = c.output_dir.generic_string();
  j["predictions"] = c.predictions.generic_string();
  j["truth"] = c.truth.generic_string();
  j["split"] = c.split;
  j["synthetic_kind"] = c.synthetic_kind;
  j["synthetic_count"] = c.synthetic_count;
  j["synthetic_modes"] = c.synthetic_modes;
  return j.dump(2);
}

RunConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::config_error, std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::config_error, "config file must hold a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) {
      apply_setting(c, key, "");
    } else if (value.is_string()) {
      apply_setting(c, key, value.get<std::string>());
    } else if (value.is_number() || value.is_boolean()) {
      // dump() gives a text form from_chars accepts for both ints and reals.
      apply_setting(c, key, value.dump());
    } else {
      fail(ErrorCode::config_error, "config '" + key + "' must be a scalar");
    }
  }
  return c;
}

std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

void apply_environment(RunConfig& config, EnvLookup lookup) {
  for (const auto& key : config_keys()) {
    const std::string var = "HYPERVAE_" + upper(key);
    if (auto value = lookup(var.c_str())) apply_setting(config, key, *value);
  }
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                         const std::map<std::string, std::string>& overrides, EnvLookup lookup) {
  RunConfig c;
  if (config_file) c = config_from_json(data::read_text(*config_file));
  if (lookup) apply_environment(c, lookup);
  for (const auto& [key, value] : overrides) apply_setting(c, key, value);
  return c;
}

void validate_config(const RunConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) fail(ErrorCode::config_error, msg);
  };
  require(c.train_fraction > 0.0 && c.train_fraction < 1.0, "train_fraction must lie in (0, 1)");
  require(c.epochs >= 0, "epochs must be non-negative");
  require(c.batch_size >= 2, "batch_size must be at least 2");
  require(c.learning_rate > 0.0, "learning_rate must be positive");
  require(c.kl_weight >= 0.0, "kl_weight must be non-negative");
  require(c.qc_max_roughness > 0.0, "qc_max_roughness must be positive");
  require(c.n_components >= 1, "n_components must be at least 1");
  require(c.ensemble_n >= 1, "ensemble_n must be at least 1");
  require(c.synthetic_count >= 1, "synthetic_count must be at least 1");
  require(c.synthetic_modes >= 2, "synthetic_modes must be at least 2");
}

std::uint64_t require_seed(const RunConfig& config, std::string_view command) {
  if (!config.seed) {
    fail(ErrorCode::config_error, std::string(command) + " requires an explicit seed (--seed)");
  }
  return *config.seed;
}

}  // namespace hypervae::app
