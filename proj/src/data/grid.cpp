#include "hypervae/data/grid.hpp"

#include "hypervae/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace hypervae::data {

namespace {

// Band centers computed in floating point may land a hair outside the source
// range (e.g. 400 + 40 * 7.4).
constexpr double range_slack_nm = 1e-9;

}  // namespace

void validate_spectrum(const Spectrum& spectrum) {
  if (spectrum.wavelengths.size() != spectrum.values.size()) {
    fail(ErrorCode::dimension_mismatch, "spectrum has " +
                                            std::to_string(spectrum.wavelengths.size()) +
                                            " wavelengths but " +
                                            std::to_string(spectrum.values.size()) + " values");
  }
  for (std::size_t i = 1; i < spectrum.wavelengths.size(); ++i) {
    if (!(spectrum.wavelengths[i] > spectrum.wavelengths[i - 1])) {
      fail(ErrorCode::invalid_argument, "spectrum wavelengths must be strictly increasing");
    }
  }
  for (double v : spectrum.values) {
    if (!std::isfinite(v)) fail(ErrorCode::non_finite, "spectrum contains non-finite values");
  }
}

std::string_view mission_name(Mission mission) {
  switch (mission) {
    case Mission::pace: return "pace";
    case Mission::emit: return "emit";
    case Mission::custom: return "custom";
  }
  return "custom";
}

Mission parse_mission(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "pace") return Mission::pace;
  if (lower == "emit") return Mission::emit;
  fail(ErrorCode::unknown_mission, "unknown mission '" + std::string(name) + "'");
}

std::string SpectralGrid::id() const {
  if (mission == Mission::custom) return "custom:" + std::to_string(band_centers.size());
  return std::string(mission_name(mission));
}

std::size_t SpectralGrid::nearest_band(double nm) const {
  if (band_centers.empty()) fail(ErrorCode::invalid_argument, "empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < band_centers.size(); ++i) {
    if (std::abs(band_centers[i] - nm) < std::abs(band_centers[best] - nm)) best = i;
  }
  return best;
}

std::string SpectralGrid::to_json() const {
  nlohmann::json j;
  j["mission"] = std::string(mission_name(mission));
  j["band_centers"] = band_centers;
  return j.dump(2);
}

SpectralGrid make_grid(Mission mission) {
  SpectralGrid grid;
  grid.mission = mission;
  switch (mission) {
    case Mission::pace: {
      grid.band_centers.resize(pace_band_count);
      const double step = 300.0 / static_cast<double>(pace_band_count - 1);
      for (std::size_t k = 0; k < pace_band_count; ++k) {
        grid.band_centers[k] = 400.0 + step * static_cast<double>(k);
      }
      grid.band_centers.back() = 700.0;
      break;
    }
    case Mission::emit:
      grid.band_centers.resize(emit_band_count);
      for (std::size_t k = 0; k < emit_band_count; ++k) {
        grid.band_centers[k] = 400.0 + 7.4 * static_cast<double>(k);
      }
      break;
    case Mission::custom:
      fail(ErrorCode::unknown_mission, "custom grids need explicit band centers");
  }
  return grid;
}

SpectralGrid make_custom_grid(std::vector<double> band_centers) {
  if (band_centers.empty()) fail(ErrorCode::invalid_argument, "custom grid has no bands");
  for (std::size_t i = 1; i < band_centers.size(); ++i) {
    if (!(band_centers[i] > band_centers[i - 1])) {
      fail(ErrorCode::invalid_argument, "grid band centers must be strictly increasing");
    }
  }
  return SpectralGrid{Mission::custom, std::move(band_centers)};
}

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-6) return false;
  }
  return true;
}

std::vector<double> resample_values(const std::vector<double>& wavelengths,
                                    const std::vector<double>& values,
                                    const std::vector<double>& centers) {
  validate_spectrum(Spectrum{wavelengths, values});
  if (wavelengths.empty()) fail(ErrorCode::invalid_argument, "cannot resample an empty spectrum");
  const double lo = wavelengths.front();
  const double hi = wavelengths.back();
  std::vector<double> out;
  out.reserve(centers.size());
  for (double c : centers) {
    if (c < lo - range_slack_nm || c > hi + range_slack_nm) {
      fail(ErrorCode::domain_error, "band center " + std::to_string(c) +
                                        " nm lies outside the source range [" +
                                        std::to_string(lo) + ", " + std::to_string(hi) + "] nm");
    }
    const double x = std::clamp(c, lo, hi);
    auto upper = std::lower_bound(wavelengths.begin(), wavelengths.end(), x);
    const auto j = static_cast<std::size_t>(upper - wavelengths.begin());
    if (wavelengths[j] == x) {
      out.push_back(values[j]);
      continue;
    }
    const double t = (x - wavelengths[j - 1]) / (wavelengths[j] - wavelengths[j - 1]);
    out.push_back(values[j - 1] + t * (values[j] - values[j - 1]));
  }
  return out;
}

Spectrum resample_spectrum(const Spectrum& spectrum, const SpectralGrid& grid) {
  return Spectrum{grid.band_centers,
                  resample_values(spectrum.wavelengths, spectrum.values, grid.band_centers)};
}

}  // namespace hypervae::data
