#include "hypervae/data/synthetic.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hypervae::data {

namespace {

double gaussian_bump(double wl, double center, double width) {
  const double t = (wl - center) / width;
  return std::exp(-t * t);
}

double uniform_in(nn::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::vector<double> base_rrs_shape(const std::vector<double>& wavelengths, nn::Rng& rng) {
  const double green_center = uniform_in(rng, 480.0, 580.0);
  const double green_width = uniform_in(rng, 40.0, 80.0);
  const double green_gain = uniform_in(rng, 0.5, 3.0);
  const double red_center = uniform_in(rng, 640.0, 690.0);
  const double red_width = uniform_in(rng, 12.0, 20.0);
  const double red_gain = uniform_in(rng, 0.0, 1.0);
  const double level = uniform_in(rng, 0.5e-3, 2.0e-3);
  std::vector<double> out;
  out.reserve(wavelengths.size());
  for (double wl : wavelengths) {
    out.push_back(level * (1.0 + 2.0 * green_gain * gaussian_bump(wl, green_center, green_width) +
                           red_gain * gaussian_bump(wl, red_center, red_width)));
  }
  return out;
}

std::vector<double> aphy_family(const std::vector<double>& wavelengths, int mode, nn::Rng& rng) {
  const double center = 430.0 + 45.0 * mode + uniform_in(rng, -5.0, 5.0);
  const double width = uniform_in(rng, 25.0, 35.0);
  const double amplitude = 0.05 * (1.0 + 1.5 * mode) * uniform_in(rng, 0.9, 1.1);
  std::vector<double> out;
  out.reserve(wavelengths.size());
  for (double wl : wavelengths) {
    out.push_back(0.002 + amplitude * (gaussian_bump(wl, center, width) +
                                       0.4 * gaussian_bump(wl, 675.0, 12.0)));
  }
  return out;
}

void check_wavelengths(const std::vector<double>& wavelengths) {
  if (wavelengths.size() < 3) fail(ErrorCode::invalid_argument, "synthetic data needs >= 3 bands");
  validate_spectrum(Spectrum{wavelengths, std::vector<double>(wavelengths.size(), 0.0)});
}

}  // namespace

std::vector<double> fine_wavelengths() {
  std::vector<double> out;
  for (int wl = 400; wl <= 700; ++wl) out.push_back(static_cast<double>(wl));
  return out;
}

double mean_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    fail(ErrorCode::dimension_mismatch, "mean_abs_difference needs equal nonempty vectors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

SampleSet gen_one_to_many(const OneToManyConfig& config, nn::Rng& rng) {
  if (config.modes_per_rrs < 2) {
    fail(ErrorCode::invalid_argument, "modes_per_rrs must be >= 2, got " +
                                          std::to_string(config.modes_per_rrs));
  }
  if (config.n_rrs_shapes < 1) fail(ErrorCode::invalid_argument, "n_rrs_shapes must be >= 1");
  check_wavelengths(config.wavelengths);

  SampleSet set;
  set.schema = config.schema;
  set.rrs_wavelengths = config.wavelengths;
  if (config.schema == TargetSchema::aphy) set.aphy_wavelengths = config.wavelengths;

  constexpr int max_attempts = 100;
  for (int s = 0; s < config.n_rrs_shapes; ++s) {
    const std::vector<double> rrs = base_rrs_shape(config.wavelengths, rng);
    std::vector<SampleRecord> group;
    for (int attempt = 0;; ++attempt) {
      if (attempt == max_attempts) {
        fail(ErrorCode::invalid_argument, "could not reach min_mode_separation " +
                                              format_number(config.min_mode_separation));
      }
      group.clear();
      const double base_log_chla = uniform_in(rng, -0.5, 0.5);
      for (int m = 0; m < config.modes_per_rrs; ++m) {
        SampleRecord rec;
        rec.id = "s" + std::to_string(s) + "_m" + std::to_string(m);
        rec.rrs = rrs;
        if (config.schema == TargetSchema::aphy) {
          rec.aphy = aphy_family(config.wavelengths, m, rng);
        } else {
          rec.chla = std::pow(10.0, base_log_chla + static_cast<double>(m));
        }
        rec.source = "synthetic-one-to-many";
        rec.mode = m;
        group.push_back(std::move(rec));
      }
      double closest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
          const double d = config.schema == TargetSchema::aphy
                               ? mean_abs_difference(group[i].aphy, group[j].aphy)
                               : std::abs(std::log10(group[i].chla) - std::log10(group[j].chla));
          closest = std::min(closest, d);
        }
      }
      if (closest > config.min_mode_separation) break;
    }
    for (auto& rec : group) set.records.push_back(std::move(rec));
  }
  return set;
}

SampleSet gen_paired(const PairedConfig& config, nn::Rng& rng) {
  if (config.n_samples < 1) fail(ErrorCode::invalid_argument, "n_samples must be >= 1");
  check_wavelengths(config.wavelengths);

  SampleSet set;
  set.schema = config.schema;
  set.rrs_wavelengths = config.wavelengths;
  if (config.schema == TargetSchema::aphy) set.aphy_wavelengths = config.wavelengths;

  for (int i = 0; i < config.n_samples; ++i) {
    const double chl = std::pow(10.0, uniform_in(rng, -1.0, 1.5));
    const double accessory = uniform_in(rng, 0.0, 0.3);
    const double cdom_440 = uniform_in(rng, 0.05, 0.5);
    const double bbp_550 = uniform_in(rng, 0.002, 0.02);
    const double aphy_scale = 0.06 * std::pow(chl, 0.65);

    SampleRecord rec;
    rec.id = "p" + std::to_string(i);
    rec.source = "synthetic-paired";
    for (double wl : config.wavelengths) {
      const double aphy = aphy_scale * (gaussian_bump(wl, 440.0, 35.0) +
                                        accessory * gaussian_bump(wl, 520.0, 30.0) +
                                        0.5 * gaussian_bump(wl, 675.0, 12.0) + 0.05);
      const double water = 0.005 + 0.4 * std::exp((wl - 700.0) / 40.0);
      const double cdom = cdom_440 * std::exp(-0.015 * (wl - 440.0));
      const double bb = 0.0015 + bbp_550 * (550.0 / wl);
      const double u = bb / (water + aphy + cdom + bb);
      const double below = 0.0949 * u + 0.0794 * u * u;
      rec.rrs.push_back(0.52 * below / (1.0 - 1.7 * below));
      if (config.schema == TargetSchema::aphy) rec.aphy.push_back(aphy);
    }
    rec.chla = chl;
    set.records.push_back(std::move(rec));
  }
  return set;
}

}  // namespace hypervae::data
