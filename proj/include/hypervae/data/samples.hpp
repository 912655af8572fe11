#pragma once

#include "hypervae/data/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hypervae::data {

enum class TargetSchema { aphy, chla };

std::string_view schema_name(TargetSchema schema);
TargetSchema parse_schema(std::string_view name);

enum class Split { unassigned, train, val, test };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct SampleRecord {
  std::string id;
  std::vector<double> rrs;   // on SampleSet::rrs_wavelengths
  std::vector<double> aphy;  // on SampleSet::aphy_wavelengths; empty for chla sets
  double chla = 0.0;         // ug/L; unused for aphy sets
  Split split = Split::unassigned;
  std::string source;
  std::optional<int> mode;  // true mode index for synthetic one-to-many records
};

/// Paired (Rrs, target) records sharing one wavelength layout.
struct SampleSet {
  TargetSchema schema = TargetSchema::aphy;
  std::vector<double> rrs_wavelengths;
  std::vector<double> aphy_wavelengths;
  std::vector<SampleRecord> records;
  // False for Rrs-only inputs read with targets_optional; target fields are then unset.
  bool has_targets = true;

  std::size_t size() const { return records.size(); }
  std::size_t count(Split split) const;
  SampleSet subset(Split split) const;
};

struct Rejection {
  std::string id;
  std::size_t line = 0;  // 0 when the rejection did not come from parsing
  std::string reason;
};

struct LoadResult {
  SampleSet samples;
  std::vector<Rejection> excluded;  // rows dropped for NaN cells
};

/// Parses the dataset CSV:
///   id, rrs_<nm>..., aphy_<nm>...  [, split] [, source] [, mode]
///   id, rrs_<nm>..., chla          [, split] [, source] [, mode]
/// Rows holding NaN (or empty) numeric cells are excluded and reported.
/// Any other non-numeric cell, a missing column group, or a duplicate id is
/// a hard error naming the line. With `targets_optional`, a header without
/// any target column yields an Rrs-only set (has_targets = false).
LoadResult load_samples(const std::filesystem::path& path, TargetSchema schema,
                        bool targets_optional = false);
LoadResult parse_samples(std::string_view text, TargetSchema schema,
                         bool targets_optional = false);

/// Canonical CSV with shortest round-trip number formatting; byte-stable for
/// identical inputs. Split, source and mode columns are always written.
std::string format_samples(const SampleSet& samples);
void write_samples(const std::filesystem::path& path, const SampleSet& samples);

std::string format_rejections(const std::vector<Rejection>& rejections);

/// Seeded uniform shuffle followed by a prefix split: the first
/// round(train_fraction * n) shuffled records become train, the rest test.
SampleSet split_train_test(const SampleSet& samples, double train_fraction, std::uint64_t seed);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace hypervae::data
