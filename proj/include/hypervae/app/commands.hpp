#pragma once

#include "hypervae/app/checkpoint.hpp"
#include "hypervae/app/config.hpp"
#include "hypervae/metrics/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hypervae::app {

inline constexpr const char* toolkit_version = "0.1.0";

struct PreprocessOutcome {
  std::filesystem::path output;      // <output_dir>/preprocessed.csv
  std::filesystem::path rejections;  // <output_dir>/rejections.csv
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t train = 0;
  std::size_t test = 0;
};

/// Raw dataset -> QC -> resample onto the mission grid -> seeded split ->
/// canonical CSV plus an id,reason rejection report.
PreprocessOutcome cmd_preprocess(const RunConfig& config);

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path history;     // <output_dir>/train_history.csv
  std::filesystem::path experiment;  // <output_dir>/experiment.json
  nn::TrainHistory train_history;
  std::optional<metrics::MetricsReport> test_metrics;
};

/// Fits normalization on the train split, trains the configured model,
/// saves the best-epoch checkpoint and writes the experiment record. Test
/// metrics are computed when the test split has at least two rows.
TrainOutcome cmd_train(const RunConfig& config);

struct PredictOutcome {
  std::filesystem::path output;
  std::size_t samples = 0;
  std::size_t rows = 0;
};

/// Long-format predictions: id,band,actual,predicted and, when
/// ensemble_n > 1, mean,std. `band` is the wavelength in nm or "chla";
/// `actual` is empty for Rrs-only inputs. With an ensemble, `predicted` is
/// the first draw, so it matches a single-draw run with the same seed.
PredictOutcome cmd_predict(const RunConfig& config);

struct BandReport {
  double target_nm = 0.0;
  std::string label;  // band class label reported for the mission
  double band_nm = 0.0;
  metrics::MetricsReport report;
};

struct EvaluationReport {
  metrics::MetricsReport overall;
  std::vector<BandReport> bands;  // empty for chla predictions

  std::string to_json() const;
};

/// Overall metrics plus the bands nearest 440, 620 and 670 nm. Writes
/// <output_dir>/metrics.json.
EvaluationReport cmd_evaluate(const RunConfig& config);

/// One metrics row per band of the mission grid; writes <output_dir>/sweep.csv.
metrics::BandSweep cmd_sweep(const RunConfig& config);

/// Writes a synthetic raw dataset (default <output_dir>/synthetic.csv).
std::filesystem::path cmd_gen_synthetic(const RunConfig& config);

/// Parsed long-format predictions file.
struct PredictionRow {
  std::string id;
  std::string band;
  std::optional<double> actual;
  double predicted = 0.0;
};

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

/// Reported class labels for the nearest-band targets: PACE "440/620/670",
/// EMIT "440/618/671".
std::vector<std::string> band_labels(data::Mission mission);

}  // namespace hypervae::app
