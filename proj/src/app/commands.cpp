#include "hypervae/app/commands.hpp"

#include "hypervae/app/fingerprint.hpp"
#include "hypervae/data/quality.hpp"
#include "hypervae/data/synthetic.hpp"
#include "hypervae/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

namespace hypervae::app {
namespace {

using json = nlohmann::ordered_json;
using nn::Matrix;

std::string describe_grid(const std::vector<double>& bands) {
  if (bands.empty()) return "0 bands";
  return std::to_string(bands.size()) + " bands, " + data::format_number(bands.front()) + "-" +
         data::format_number(bands.back()) + " nm";
}

void require_grid(const std::vector<double>& expected, const std::vector<double>& actual,
                  const std::string& what) {
  if (!data::same_grid(expected, actual)) {
    fail(ErrorCode::grid_mismatch, what + " is on " + describe_grid(actual) + ", expected " +
                                       describe_grid(expected));
  }
}

Matrix rrs_matrix(const data::SampleSet& s) {
  Matrix m(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.rrs_wavelengths.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.rrs_wavelengths.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.records[i].rrs[j];
    }
  }
  return m;
}

Matrix target_matrix(const data::SampleSet& s) {
  if (s.schema == data::TargetSchema::chla) {
    Matrix m(static_cast<Eigen::Index>(s.size()), 1);
    for (std::size_t i = 0; i < s.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = s.records[i].chla;
    return m;
  }
  Matrix m(static_cast<Eigen::Index>(s.size()),
           static_cast<Eigen::Index>(s.aphy_wavelengths.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.aphy_wavelengths.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.records[i].aphy[j];
    }
  }
  return m;
}

std::span<const double> flat(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

data::TargetSchema model_schema(const Model& model) {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, vae::VaeParameters>) {
          return m.arch.kind == vae::ModelKind::aphy ? data::TargetSchema::aphy
                                                     : data::TargetSchema::chla;
        } else {
          return m.arch.target == mdn::TargetKind::aphy ? data::TargetSchema::aphy
                                                        : data::TargetSchema::chla;
        }
      },
      model);
}

const std::optional<data::SpectralGrid>& model_grid(const Model& model) {
  return std::visit([](const auto& m) -> const std::optional<data::SpectralGrid>& { return m.grid; },
                    model);
}

bool is_stochastic(const Model& model, const RunConfig& config) {
  return std::holds_alternative<vae::VaeParameters>(model) ||
         config.mdn_mode == mdn::PredictionMode::sample;
}

struct Predictions {
  Matrix predicted;
  std::optional<Matrix> mean;
  std::optional<Matrix> std;
};

Predictions run_prediction(const Model& model, const Matrix& rrs, const RunConfig& config,
                           nn::Rng& rng) {
  Predictions out;
  if (const auto* v = std::get_if<vae::VaeParameters>(&model)) {
    if (config.ensemble_n > 1) {
      auto ens = vae::predict_ensemble(*v, rrs, config.ensemble_n, rng);
      out.predicted = std::move(ens.draws.front());
      out.mean = std::move(ens.mean);
      out.std = std::move(ens.std);
    } else {
      out.predicted = vae::predict(*v, rrs, rng);
    }
    return out;
  }
  const auto& m = std::get<mdn::MdnParameters>(model);
  out.predicted = mdn::predict(m, rrs, config.mdn_mode, rng);
  if (config.ensemble_n > 1) {
    Matrix sum = out.predicted;
    std::vector<Matrix> draws{out.predicted};
    for (int k = 1; k < config.ensemble_n; ++k) {
      draws.push_back(mdn::predict(m, rrs, config.mdn_mode, rng));
      sum += draws.back();
    }
    const Matrix mean = sum / static_cast<double>(config.ensemble_n);
    Matrix var = Matrix::Zero(mean.rows(), mean.cols());
    for (const auto& d : draws) var += (d - mean).array().square().matrix();
    out.mean = mean;
    out.std = (var / static_cast<double>(config.ensemble_n)).array().sqrt().matrix();
  }
  return out;
}

json parse_json(const std::string& text) { return json::parse(text); }

std::optional<double> parse_optional_number(std::string_view cell, std::size_t line,
                                            std::string_view column) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    fail(ErrorCode::parse_error, "predictions line " + std::to_string(line) + ", column '" +
                                     std::string(column) + "': non-numeric cell '" +
                                     std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

// Predictions with their ground truth resolved, either from the file's
// `actual` column or from a separate truth dataset.
std::vector<PredictionRow> predictions_with_truth(const RunConfig& config) {
  auto rows = read_predictions(config.predictions_path());
  if (rows.empty()) fail(ErrorCode::invalid_argument, "predictions file has no rows");

  if (!config.truth.empty()) {
    const bool chla = rows.front().band == "chla";
    const auto truth =
        data::load_samples(config.truth, chla ? data::TargetSchema::chla : data::TargetSchema::aphy)
            .samples;
    std::map<std::string, const data::SampleRecord*, std::less<>> by_id;
    for (const auto& r : truth.records) by_id.emplace(r.id, &r);
    std::set<std::string, std::less<>> predicted_ids;
    for (auto& row : rows) {
      predicted_ids.insert(row.id);
      auto it = by_id.find(row.id);
      if (it == by_id.end()) {
        fail(ErrorCode::id_mismatch, "prediction id '" + row.id + "' is absent from the truth file");
      }
      if (chla) {
        row.actual = it->second->chla;
        continue;
      }
      double nm = 0.0;
      auto [ptr, ec] = std::from_chars(row.band.data(), row.band.data() + row.band.size(), nm);
      const auto& wl = truth.aphy_wavelengths;
      auto pos = std::find_if(wl.begin(), wl.end(), [&](double w) { return std::abs(w - nm) <= 1e-6; });
      if (ec != std::errc() || pos == wl.end()) {
        fail(ErrorCode::grid_mismatch, "band '" + row.band + "' is absent from the truth file");
      }
      row.actual = it->second->aphy[static_cast<std::size_t>(pos - wl.begin())];
    }
    for (const auto& r : truth.records) {
      if (!predicted_ids.contains(r.id)) {
        fail(ErrorCode::id_mismatch, "truth id '" + r.id + "' has no prediction");
      }
    }
  }
  for (const auto& row : rows) {
    if (!row.actual) {
      fail(ErrorCode::missing_truth,
           "prediction for '" + row.id + "' has no actual value; supply --truth");
    }
  }
  return rows;
}

std::vector<double> numeric_bands(const std::vector<PredictionRow>& rows) {
  std::set<double> bands;
  for (const auto& r : rows) {
    if (r.band == "chla") fail(ErrorCode::invalid_argument, "chla predictions have no bands");
    double nm = 0.0;
    auto [ptr, ec] = std::from_chars(r.band.data(), r.band.data() + r.band.size(), nm);
    if (ec != std::errc() || ptr != r.band.data() + r.band.size()) {
      fail(ErrorCode::parse_error, "band '" + r.band + "' is not a wavelength");
    }
    bands.insert(nm);
  }
  return {bands.begin(), bands.end()};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PreprocessOutcome cmd_preprocess(const RunConfig& config) {
  validate_config(config);
  if (config.dataset.empty()) fail(ErrorCode::config_error, "preprocess needs a dataset path");
  auto loaded = data::load_samples(config.dataset, config.task);
  std::vector<data::Rejection> rejected = std::move(loaded.excluded);

  auto qc = data::quality_control(loaded.samples, {config.qc_max_roughness});
  rejected.insert(rejected.end(), qc.rejected.begin(), qc.rejected.end());
  if (qc.kept.records.empty()) {
    fail(ErrorCode::empty_after_qc, "empty after QC: all " + std::to_string(rejected.size()) +
                                        " rows were rejected");
  }

  const data::SpectralGrid grid = data::make_grid(config.mission);
  data::SampleSet resampled = qc.kept;
  resampled.rrs_wavelengths = grid.band_centers;
  if (resampled.schema == data::TargetSchema::aphy) resampled.aphy_wavelengths = grid.band_centers;
  for (auto& rec : resampled.records) {
    rec.rrs = data::resample_values(qc.kept.rrs_wavelengths, rec.rrs, grid.band_centers);
    if (resampled.schema == data::TargetSchema::aphy) {
      rec.aphy = data::resample_values(qc.kept.aphy_wavelengths, rec.aphy, grid.band_centers);
    }
  }
  const auto split = data::split_train_test(resampled, config.train_fraction, config.seed.value_or(0));

  PreprocessOutcome out;
  out.output = config.output_dir / "preprocessed.csv";
  out.rejections = config.output_dir / "rejections.csv";
  data::write_samples(out.output, split);
  data::write_text(out.rejections, data::format_rejections(rejected));
  out.kept = split.size();
  out.rejected = rejected.size();
  out.train = split.count(data::Split::train);
  out.test = split.count(data::Split::test);
  return out;
}

TrainOutcome cmd_train(const RunConfig& config) {
  validate_config(config);
  const std::uint64_t seed = require_seed(config, "train");
  if (config.dataset.empty()) fail(ErrorCode::config_error, "train needs a dataset path");
  const auto started = std::chrono::steady_clock::now();

  const std::string dataset_bytes = data::read_text(config.dataset);
  const auto samples = data::parse_samples(dataset_bytes, config.task).samples;
  const data::SpectralGrid grid = data::make_grid(config.mission);
  require_grid(grid.band_centers, samples.rrs_wavelengths, "dataset Rrs");
  if (samples.schema == data::TargetSchema::aphy) {
    require_grid(grid.band_centers, samples.aphy_wavelengths, "dataset aphy");
  }
  const auto train_set = samples.subset(data::Split::train);
  if (train_set.size() < 2) {
    fail(ErrorCode::missing_split, "dataset needs at least two 'train' rows; run preprocess first");
  }
  const auto val_set = samples.subset(data::Split::val);
  const auto test_set = samples.subset(data::Split::test);

  const auto norm = data::fit_normalization(samples, config.normalization);
  const Matrix train_rrs = rrs_matrix(train_set);
  const Matrix train_targets = target_matrix(train_set);
  const int in_dim = static_cast<int>(train_rrs.cols());
  const int out_dim = static_cast<int>(train_targets.cols());

  nn::Rng init_rng(seed);
  nn::TrainConfig tc;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.adam.learning_rate = config.learning_rate;

  Model trained;
  nn::TrainHistory history;
  if (config.model == ModelType::vae) {
    const auto kind = config.task == data::TargetSchema::aphy ? vae::ModelKind::aphy
                                                               : vae::ModelKind::chla;
    auto model = vae::build_vae(kind, in_dim, out_dim, config.kl_weight, init_rng);
    model.normalization = norm;
    model.grid = grid;
    tc.seed = init_rng.next_u64();
    if (!val_set.records.empty()) {
      tc.validation = nn::TensorDataset{vae::prepare_inputs(model, rrs_matrix(val_set)),
                                        vae::prepare_targets(kind, target_matrix(val_set))};
    }
    nn::TensorDataset data{vae::prepare_inputs(model, train_rrs),
                           vae::prepare_targets(kind, train_targets)};
    auto result = vae::train_vae(model, data, tc);
    trained = std::move(result.model);
    history = std::move(result.history);
  } else {
    mdn::MdnArchitecture arch;
    arch.target = config.task == data::TargetSchema::aphy ? mdn::TargetKind::aphy
                                                          : mdn::TargetKind::chla;
    arch.input_dim = in_dim;
    arch.output_dim = out_dim;
    arch.n_components = config.n_components;
    auto model = mdn::build_mdn(arch, init_rng);
    model.normalization = norm;
    model.grid = grid;
    tc.seed = init_rng.next_u64();
    if (!val_set.records.empty()) {
      tc.validation = nn::TensorDataset{mdn::prepare_inputs(model, rrs_matrix(val_set)),
                                        mdn::prepare_targets(target_matrix(val_set))};
    }
    nn::TensorDataset data{mdn::prepare_inputs(model, train_rrs), mdn::prepare_targets(train_targets)};
    auto result = mdn::train_mdn(model, data, tc);
    trained = std::move(result.model);
    history = std::move(result.history);
  }

  TrainOutcome out;
  out.checkpoint = config.checkpoint_path();
  out.history = config.output_dir / "train_history.csv";
  out.experiment = config.output_dir / "experiment.json";
  const std::string checkpoint_bytes = serialize_checkpoint(trained);
  data::write_text(out.checkpoint, checkpoint_bytes);
  data::write_text(out.history, history.to_csv());

  if (test_set.size() >= 2) {
    // Same draw sequence as `predict` with this seed, so the record's
    // metrics can be reproduced through predict + evaluate.
    nn::Rng eval_rng(seed);
    const auto pred = run_prediction(trained, rrs_matrix(test_set), config, eval_rng);
    out.test_metrics = metrics::evaluate_all(flat(pred.predicted), flat(target_matrix(test_set)));
  }

  json record;
  record["toolkit_version"] = toolkit_version;
  record["command"] = "train";
  record["config"] = parse_json(config_to_json(config));
  record["dataset"] = config.dataset.generic_string();
  record["dataset_sha256"] = sha256_hex(dataset_bytes);
  record["checkpoint"] = out.checkpoint.generic_string();
  record["checkpoint_sha256"] = sha256_hex(checkpoint_bytes);
  record["train_history"] = out.history.generic_string();
  record["epochs_run"] = history.epochs();
  record["best_epoch"] = history.best_epoch ? json(*history.best_epoch + 1) : json(nullptr);
  record["metrics"] = {{"test", out.test_metrics ? parse_json(out.test_metrics->to_json())
                                                 : json(nullptr)}};
  record["wall_seconds"] = seconds_since(started);
  data::write_text(out.experiment, record.dump(2) + "\n");
  out.train_history = std::move(history);
  return out;
}

PredictOutcome cmd_predict(const RunConfig& config) {
  validate_config(config);
  const Model model = load_checkpoint(config.checkpoint_path());
  if (config.dataset.empty()) fail(ErrorCode::config_error, "predict needs an input dataset path");
  const std::uint64_t seed =
      is_stochastic(model, config) ? require_seed(config, "predict") : config.seed.value_or(0);

  auto input = data::load_samples(config.dataset, model_schema(model), true).samples;
  const auto& grid = model_grid(model);
  if (!grid) fail(ErrorCode::untrained_model, "checkpoint carries no spectral grid");
  require_grid(grid->band_centers, input.rrs_wavelengths, "input Rrs");
  const bool aphy = input.schema == data::TargetSchema::aphy;
  if (input.has_targets && aphy) require_grid(grid->band_centers, input.aphy_wavelengths, "input aphy");
  if (!config.split.empty()) input = input.subset(data::parse_split(config.split));
  if (input.records.empty()) fail(ErrorCode::invalid_argument, "no input rows to predict");

  nn::Rng rng(seed);
  const auto pred = run_prediction(model, rrs_matrix(input), config, rng);
  const bool ensemble = pred.mean.has_value();

  std::string csv = ensemble ? "id,band,actual,predicted,mean,std\n" : "id,band,actual,predicted\n";
  std::size_t rows = 0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const auto& rec = input.records[i];
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < pred.predicted.cols(); ++j) {
      csv += rec.id;
      csv += ',';
      csv += aphy ? data::format_number(grid->band_centers[static_cast<std::size_t>(j)]) : "chla";
      csv += ',';
      if (input.has_targets) {
        csv += data::format_number(aphy ? rec.aphy[static_cast<std::size_t>(j)] : rec.chla);
      }
      csv += ',' + data::format_number(pred.predicted(r, j));
      if (ensemble) {
        csv += ',' + data::format_number((*pred.mean)(r, j));
        csv += ',' + data::format_number((*pred.std)(r, j));
      }
      csv += '\n';
      ++rows;
    }
  }
  PredictOutcome out{config.predictions_path(), input.size(), rows};
  data::write_text(out.output, csv);
  return out;
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
  const std::string text = data::read_text(path);
  std::vector<PredictionRow> rows;
  std::size_t start = 0;
  std::size_t line_no = 0;
  std::optional<std::size_t> id_col, band_col, actual_col, predicted_col;
  std::size_t n_cols = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (!n_cols) {
      n_cols = cells.size();
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c] == "id") id_col = c;
        if (cells[c] == "band") band_col = c;
        if (cells[c] == "actual") actual_col = c;
        if (cells[c] == "predicted") predicted_col = c;
      }
      if (!id_col || !band_col || !predicted_col) {
        fail(ErrorCode::missing_column, "predictions header needs id, band and predicted columns");
      }
      if (!actual_col) fail(ErrorCode::missing_truth, "predictions file has no 'actual' column");
      continue;
    }
    if (cells.size() != n_cols) {
      fail(ErrorCode::parse_error, "predictions line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(n_cols) + " cells");
    }
    PredictionRow row;
    row.id = std::string(cells[*id_col]);
    row.band = std::string(cells[*band_col]);
    row.actual = parse_optional_number(cells[*actual_col], line_no, "actual");
    auto p = parse_optional_number(cells[*predicted_col], line_no, "predicted");
    if (!p) fail(ErrorCode::parse_error, "predictions line " + std::to_string(line_no) + ": empty prediction");
    row.predicted = *p;
    rows.push_back(std::move(row));
  }
  if (!n_cols) fail(ErrorCode::missing_column, "predictions file is empty");
  return rows;
}

std::vector<std::string> band_labels(data::Mission mission) {
  if (mission == data::Mission::emit) return {"440", "618", "671"};
  return {"440", "620", "670"};
}

std::string EvaluationReport::to_json() const {
  json j;
  j["overall"] = parse_json(overall.to_json());
  json bands_json = json::array();
  for (const auto& b : bands) {
    bands_json.push_back({{"label", b.label},
                          {"target_nm", b.target_nm},
                          {"band_nm", b.band_nm},
                          {"metrics", parse_json(b.report.to_json())}});
  }
  j["bands"] = std::move(bands_json);
  return j.dump(2) + "\n";
}

EvaluationReport cmd_evaluate(const RunConfig& config) {
  const auto rows = predictions_with_truth(config);
  std::vector<double> estimated, measured;
  for (const auto& r : rows) {
    estimated.push_back(r.predicted);
    measured.push_back(*r.actual);
  }
  EvaluationReport report;
  report.overall = metrics::evaluate_all(estimated, measured);

  if (rows.front().band != "chla") {
    const auto grid = data::make_custom_grid(numeric_bands(rows));
    const auto labels = band_labels(config.mission);
    const double targets[3] = {440.0, 620.0, 670.0};
    for (std::size_t t = 0; t < 3; ++t) {
      const double nm = grid.band_centers[grid.nearest_band(targets[t])];
      std::vector<double> e, m;
      for (const auto& r : rows) {
        if (std::abs(std::stod(r.band) - nm) <= 1e-9) {
          e.push_back(r.predicted);
          m.push_back(*r.actual);
        }
      }
      report.bands.push_back({targets[t], labels[t], nm, metrics::evaluate_all(e, m)});
    }
  }
  data::write_text(config.output_dir / "metrics.json", report.to_json());
  return report;
}

metrics::BandSweep cmd_sweep(const RunConfig& config) {
  const auto rows = predictions_with_truth(config);
  const auto bands = numeric_bands(rows);
  require_grid(data::make_grid(config.mission).band_centers, bands, "predictions");

  std::vector<std::string> ids;
  std::map<std::string, std::size_t, std::less<>> id_index;
  for (const auto& r : rows) {
    if (id_index.emplace(r.id, ids.size()).second) ids.push_back(r.id);
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  const auto d = static_cast<Eigen::Index>(bands.size());
  Matrix est = Matrix::Constant(n, d, std::numeric_limits<double>::quiet_NaN());
  Matrix meas = est;
  for (const auto& r : rows) {
    const double nm = std::stod(r.band);
    const auto j = static_cast<Eigen::Index>(std::lower_bound(bands.begin(), bands.end(), nm) - bands.begin());
    const auto i = static_cast<Eigen::Index>(id_index.at(r.id));
    est(i, j) = r.predicted;
    meas(i, j) = *r.actual;
  }
  if (!nn::all_finite(est)) {
    fail(ErrorCode::id_mismatch, "every sample needs a prediction at every band for a sweep");
  }
  auto sweep = metrics::sweep_per_band(est, meas, bands);
  data::write_text(config.output_dir / "sweep.csv", sweep.to_csv());
  return sweep;
}

std::filesystem::path cmd_gen_synthetic(const RunConfig& config) {
  validate_config(config);
  nn::Rng rng(config.seed.value_or(0));
  data::SampleSet set;
  if (config.synthetic_kind == "paired") {
    data::PairedConfig pc;
    pc.schema = config.task;
    pc.n_samples = config.synthetic_count;
    set = data::gen_paired(pc, rng);
  } else {
    data::OneToManyConfig oc;
    oc.schema = config.task;
    oc.n_rrs_shapes = config.synthetic_count;
    oc.modes_per_rrs = config.synthetic_modes;
    set = data::gen_one_to_many(oc, rng);
  }
  const auto path = config.dataset.empty() ? config.output_dir / "synthetic.csv" : config.dataset;
  data::write_samples(path, set);
  return path;
}

}  // namespace hypervae::app
