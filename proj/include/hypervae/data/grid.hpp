#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hypervae::data {

/// Wavelength-indexed values: Rrs in sr^-1 or aphy in m^-1.
struct Spectrum {
  std::vector<double> wavelengths;  // nm, strictly increasing
  std::vector<double> values;
};

/// Throws unless lengths match, wavelengths strictly increase and values are finite.
void validate_spectrum(const Spectrum& spectrum);

enum class Mission { pace, emit, custom };

std::string_view mission_name(Mission mission);
Mission parse_mission(std::string_view name);

struct SpectralGrid {
  Mission mission = Mission::custom;
  std::vector<double> band_centers;  // nm

  std::size_t size() const { return band_centers.size(); }
  /// "pace", "emit" or "custom:<n>"; stored in checkpoints.
  std::string id() const;
  /// Index of the band closest to `nm`; ties go to the lower index.
  std::size_t nearest_band(double nm) const;
  /// {"mission": ..., "band_centers": [...]}
  std::string to_json() const;
};

inline constexpr std::size_t pace_band_count = 141;
inline constexpr std::size_t emit_band_count = 41;

/// PACE: 141 centers uniform over [400, 700]. EMIT: 400 + 7.4 k, k = 0..40.
SpectralGrid make_grid(Mission mission);
SpectralGrid make_custom_grid(std::vector<double> band_centers);

/// True when both grids have the same band count and centers agree to 1e-6 nm.
bool same_grid(const std::vector<double>& a, const std::vector<double>& b);

/// Piecewise-linear interpolation at every band center. No extrapolation:
/// a center outside the source range is an error.
Spectrum resample_spectrum(const Spectrum& spectrum, const SpectralGrid& grid);
std::vector<double> resample_values(const std::vector<double>& wavelengths,
                                    const std::vector<double>& values,
                                    const std::vector<double>& centers);

}  // namespace hypervae::data
