#include "hypervae/data/quality.hpp"

#include <cmath>
#include <optional>

namespace hypervae::data {

double roughness_score(std::span<const double> values) {
  if (values.size() < 3) return 0.0;
  double second_diff = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double d = values[i + 1] - 2.0 * values[i] + values[i - 1];
    second_diff += d * d;
  }
  second_diff /= static_cast<double>(values.size() - 2);
  double energy = 0.0;
  for (double v : values) energy += v * v;
  energy /= static_cast<double>(values.size());
  if (energy == 0.0) return 0.0;
  return second_diff / energy;
}

namespace {

std::optional<std::string> value_problem(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return "nan";
  }
  for (double v : values) {
    if (v < 0.0) return "negative";
  }
  return std::nullopt;
}

}  // namespace

QualityResult quality_control(const SampleSet& samples, const QualityConfig& config) {
  QualityResult result;
  result.kept = SampleSet{samples.schema, samples.rrs_wavelengths, samples.aphy_wavelengths, {}};
  for (const auto& rec : samples.records) {
    std::optional<std::string> reason = value_problem(rec.rrs);
    if (!reason && samples.schema == TargetSchema::aphy) reason = value_problem(rec.aphy);
    if (!reason && samples.schema == TargetSchema::chla) {
      if (!std::isfinite(rec.chla)) {
        reason = "nan";
      } else if (rec.chla <= 0.0) {
        // log-space targets need strictly positive concentrations
        reason = "negative";
      }
    }
    if (!reason) {
      const bool rough_rrs = roughness_score(rec.rrs) > config.max_roughness;
      const bool rough_aphy = samples.schema == TargetSchema::aphy &&
                              roughness_score(rec.aphy) > config.max_roughness;
      if (rough_rrs || rough_aphy) reason = "zigzag";
    }
    if (reason) {
      result.rejected.push_back({rec.id, 0, *reason});
    } else {
      result.kept.records.push_back(rec);
    }
  }
  return result;
}

}  // namespace hypervae::data
