#include "hypervae/data/samples.hpp"

#include "hypervae/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace hypervae::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool is_nan_token(std::string_view cell) {
  return cell.empty() || cell == "nan" || cell == "NaN" || cell == "NAN" || cell == "-nan";
}

// nullopt on a non-numeric cell; NaN for explicit missing values.
std::optional<double> parse_cell(std::string_view cell) {
  if (is_nan_token(cell)) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* first = cell.data();
  if (!cell.empty() && cell.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_wavelength(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto v = parse_cell(name.substr(prefix.size()));
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

struct Column {
  double wavelength;
  std::size_t index;
};

std::vector<Column> sorted_columns(std::vector<Column> cols, std::string_view what) {
  std::sort(cols.begin(), cols.end(),
            [](const Column& a, const Column& b) { return a.wavelength < b.wavelength; });
  for (std::size_t i = 1; i < cols.size(); ++i) {
    if (cols[i].wavelength == cols[i - 1].wavelength) {
      fail(ErrorCode::parse_error,
           "duplicate " + std::string(what) + " wavelength column " + format_number(cols[i].wavelength));
    }
  }
  return cols;
}

}  // namespace

std::string_view schema_name(TargetSchema schema) {
  return schema == TargetSchema::aphy ? "aphy" : "chla";
}

TargetSchema parse_schema(std::string_view name) {
  if (name == "aphy") return TargetSchema::aphy;
  if (name == "chla") return TargetSchema::chla;
  fail(ErrorCode::invalid_argument, "unknown target schema '" + std::string(name) + "'");
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "";
  }
  return "";
}

Split parse_split(std::string_view name) {
  if (name.empty()) return Split::unassigned;
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  fail(ErrorCode::parse_error, "unknown split label '" + std::string(name) + "'");
}

std::size_t SampleSet::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [split](const SampleRecord& r) { return r.split == split; }));
}

SampleSet SampleSet::subset(Split split) const {
  SampleSet out{schema, rrs_wavelengths, aphy_wavelengths, {}, has_targets};
  for (const auto& r : records) {
    if (r.split == split) out.records.push_back(r);
  }
  return out;
}

LoadResult load_samples(const std::filesystem::path& path, TargetSchema schema,
                        bool targets_optional) {
  return parse_samples(read_text(path), schema, targets_optional);
}

LoadResult parse_samples(std::string_view text, TargetSchema schema, bool targets_optional) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      const std::size_t nl = text.find('\n', start);
      const std::size_t stop = nl == std::string_view::npos ? text.size() : nl;
      lines.push_back(text.substr(start, stop - start));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  // The header may carry a UTF-8 byte order mark.
  if (!lines.empty() && lines.front().substr(0, 3) == "\xEF\xBB\xBF") {
    lines.front().remove_prefix(3);
  }
  if (lines.empty() || trim(lines.front()).empty()) {
    fail(ErrorCode::missing_column, "dataset has no header row");
  }

  const auto header = split_cells(lines.front());
  std::optional<std::size_t> id_col, chla_col, split_col, source_col, mode_col;
  std::vector<Column> rrs_cols, aphy_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = header[c];
    if (name == "id") {
      id_col = c;
    } else if (name == "chla") {
      chla_col = c;
    } else if (name == "split") {
      split_col = c;
    } else if (name == "source") {
      source_col = c;
    } else if (name == "mode") {
      mode_col = c;
    } else if (auto wl = parse_wavelength(name, "rrs_")) {
      rrs_cols.push_back({*wl, c});
    } else if (auto wl2 = parse_wavelength(name, "aphy_")) {
      aphy_cols.push_back({*wl2, c});
    }
  }
  if (!id_col) fail(ErrorCode::missing_column, "header lacks an 'id' column");
  if (rrs_cols.empty()) {
    fail(ErrorCode::missing_column, "header declares no rrs_<nm> wavelength columns");
  }
  const bool has_targets =
      schema == TargetSchema::aphy ? !aphy_cols.empty() : chla_col.has_value();
  if (!has_targets && !targets_optional) {
    fail(ErrorCode::missing_column, schema == TargetSchema::aphy
                                        ? "aphy schema but header declares no aphy_<nm> columns"
                                        : "chla schema but header lacks a 'chla' column");
  }
  rrs_cols = sorted_columns(std::move(rrs_cols), "rrs");
  aphy_cols = sorted_columns(std::move(aphy_cols), "aphy");

  LoadResult result;
  SampleSet& set = result.samples;
  set.schema = schema;
  set.has_targets = has_targets;
  for (const auto& c : rrs_cols) set.rrs_wavelengths.push_back(c.wavelength);
  if (has_targets && schema == TargetSchema::aphy) {
    for (const auto& c : aphy_cols) set.aphy_wavelengths.push_back(c.wavelength);
  }

  std::map<std::string, std::size_t, std::less<>> seen;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    if (trim(lines[ln]).empty()) continue;
    const auto cells = split_cells(lines[ln]);
    if (cells.size() != header.size()) {
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " cells, found " +
                                       std::to_string(cells.size()));
    }
    SampleRecord rec;
    rec.id = std::string(cells[*id_col]);
    if (rec.id.empty()) fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": empty id");
    if (auto it = seen.find(rec.id); it != seen.end()) {
      fail(ErrorCode::duplicate_id, "duplicate id '" + rec.id + "' on lines " +
                                        std::to_string(it->second) + " and " +
                                        std::to_string(line_no));
    }
    seen.emplace(rec.id, line_no);

    bool has_nan = false;
    auto read_number = [&](std::size_t col) {
      auto v = parse_cell(cells[col]);
      if (!v) {
        fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ", column '" +
                                         std::string(header[col]) + "': non-numeric cell '" +
                                         std::string(cells[col]) + "'");
      }
      if (std::isnan(*v)) has_nan = true;
      return *v;
    };
    for (const auto& c : rrs_cols) rec.rrs.push_back(read_number(c.index));
    if (!has_targets) {
      // Rrs only.
    } else if (schema == TargetSchema::aphy) {
      for (const auto& c : aphy_cols) rec.aphy.push_back(read_number(c.index));
    } else {
      rec.chla = read_number(*chla_col);
    }
    if (split_col) rec.split = parse_split(cells[*split_col]);
    if (source_col) rec.source = std::string(cells[*source_col]);
    if (mode_col && !cells[*mode_col].empty()) {
      int mode = 0;
      const auto cell = cells[*mode_col];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), mode);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(ErrorCode::parse_error,
             "line " + std::to_string(line_no) + ": non-integer mode '" + std::string(cell) + "'");
      }
      rec.mode = mode;
    }
    if (has_nan) {
      result.excluded.push_back({rec.id, line_no, "nan"});
      continue;
    }
    set.records.push_back(std::move(rec));
  }
  return result;
}

std::string format_number(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string format_samples(const SampleSet& samples) {
  std::string out = "id";
  for (double wl : samples.rrs_wavelengths) out += ",rrs_" + format_number(wl);
  if (!samples.has_targets) {
    // Rrs-only set.
  } else if (samples.schema == TargetSchema::aphy) {
    for (double wl : samples.aphy_wavelengths) out += ",aphy_" + format_number(wl);
  } else {
    out += ",chla";
  }
  out += ",split,source,mode\n";
  for (const auto& r : samples.records) {
    out += r.id;
    for (double v : r.rrs) out += ',' + format_number(v);
    if (!samples.has_targets) {
      // Rrs-only set.
    } else if (samples.schema == TargetSchema::aphy) {
      for (double v : r.aphy) out += ',' + format_number(v);
    } else {
      out += ',' + format_number(r.chla);
    }
    out += ',';
    out += split_name(r.split);
    out += ',' + r.source + ',';
    if (r.mode) out += std::to_string(*r.mode);
    out += '\n';
  }
  return out;
}

void write_samples(const std::filesystem::path& path, const SampleSet& samples) {
  write_text(path, format_samples(samples));
}

std::string format_rejections(const std::vector<Rejection>& rejections) {
  std::string out = "id,reason\n";
  for (const auto& r : rejections) out += r.id + ',' + r.reason + '\n';
  return out;
}

SampleSet split_train_test(const SampleSet& samples, double train_fraction, std::uint64_t seed) {
  if (samples.records.empty()) fail(ErrorCode::invalid_argument, "cannot split an empty sample set");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorCode::invalid_argument, "train_fraction must lie in (0, 1), got " +
                                          format_number(train_fraction));
  }
  const std::size_t n = samples.records.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 engine(seed);
  std::shuffle(order.begin(), order.end(), engine);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  SampleSet out = samples;
  for (std::size_t k = 0; k < n; ++k) {
    out.records[order[k]].split = k < n_train ? Split::train : Split::test;
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::io_error, "failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace hypervae::data
