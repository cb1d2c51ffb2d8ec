#pragma once

// CSV loading and writing for the testbed regression format
// (RSSI1..RSSIk, X_Actual, Y_Actual) and the iBeacon zone format
// (location, b3001..b3013, optional extra columns).

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rssiloc/error.hpp"
#include "rssiloc/learners/dataset.hpp"

namespace rssiloc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw Error(ErrorKind::MissingColumn, "missing column '" + std::string(name) + "'");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    auto field = trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string row_col(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column '" + std::string(column) + "'";
}

}  // namespace detail

/// Parses a decimal number (with optional leading '+'); the whole field must be consumed.
inline std::optional<double> parse_double(std::string_view s) {
  s = detail::trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!have_header && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorKind::ShapeMismatch, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                                " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorKind::MissingColumn, "CSV has no header");
  return table;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Writes to `path.tmp` and renames over `path`, so a failure leaves no partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::IoFailure, "write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error(ErrorKind::IoFailure, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

inline std::string to_csv_text(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

inline void write_csv(const CsvTable& table, const std::filesystem::path& path) { write_file_atomic(path, to_csv_text(table)); }

// --- regression format ------------------------------------------------------

/// Index k of an "RSSI<k>" header, tolerating a trailing quote mark.
inline std::optional<int> rssi_column_index(std::string_view name) {
  if (!name.starts_with("RSSI")) return std::nullopt;
  name.remove_prefix(4);
  while (!name.empty() && (name.back() == '\'' || name.back() == '"')) name.remove_suffix(1);
  int k = 0;
  const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), k);
  if (ec != std::errc{} || ptr != name.data() + name.size() || name.empty()) return std::nullopt;
  return k;
}

/// Column indices of the RSSI<k> features, ordered by k.
inline std::vector<std::size_t> rssi_columns(const CsvTable& table) {
  std::vector<std::pair<int, std::size_t>> found;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (auto k = rssi_column_index(table.header[i])) found.emplace_back(*k, i);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::size_t> out;
  for (const auto& f : found) out.push_back(f.second);
  return out;
}

inline double cell_number(const CsvTable& t, std::size_t row, std::size_t col) {
  if (auto v = parse_double(t.rows[row][col])) return *v;
  throw Error(ErrorKind::MalformedNumber, detail::row_col(row + 1, t.header[col]) + ": '" + t.rows[row][col] + "' is not a number");
}

inline RegressionDataset regression_from_table(const CsvTable& table) {
  const auto features = rssi_columns(table);
  if (features.size() < 3) {
    throw Error(ErrorKind::MissingColumn, "need at least 3 RSSI<k> columns, found " + std::to_string(features.size()));
  }
  const std::size_t xc = table.require_column("X_Actual");
  const std::size_t yc = table.require_column("Y_Actual");
  RegressionDataset ds;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  ds.features.resize(n, static_cast<Eigen::Index>(features.size()));
  ds.targets.resize(n, 2);
  for (auto c : features) ds.feature_names.push_back(table.header[c]);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (std::size_t f = 0; f < features.size(); ++f) ds.features(i, static_cast<Eigen::Index>(f)) = cell_number(table, r, features[f]);
    ds.targets(i, 0) = cell_number(table, r, xc);
    ds.targets(i, 1) = cell_number(table, r, yc);
  }
  return ds;
}

inline RegressionDataset load_regression_csv(const std::filesystem::path& path) { return regression_from_table(read_csv(path)); }

inline CsvTable regression_table(const RegressionDataset& ds) {
  CsvTable t;
  for (std::size_t f = 0; f < ds.feature_count(); ++f) {
    t.header.push_back(f < ds.feature_names.size() ? ds.feature_names[f] : "RSSI" + std::to_string(f + 1));
  }
  t.header.emplace_back("X_Actual");
  t.header.emplace_back("Y_Actual");
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    std::vector<std::string> row;
    for (Eigen::Index f = 0; f < ds.features.cols(); ++f) row.push_back(format_double(ds.features(i, f)));
    row.push_back(format_double(ds.targets(i, 0)));
    row.push_back(format_double(ds.targets(i, 1)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_csv(const RegressionDataset& ds, const std::filesystem::path& path) { write_csv(regression_table(ds), path); }

// --- iBeacon zone format ----------------------------------------------------

/// Location label -> zone index.
struct ZoneMapping {
  std::map<std::string, std::size_t, std::less<>> zones;

  std::size_t zone_of(std::string_view label) const {
    auto it = zones.find(label);
    if (it == zones.end()) throw Error(ErrorKind::UnmappedLocation, "location '" + std::string(label) + "' has no zone");
    return it->second;
  }
};

/// `label=zone` lines; blank lines and lines starting with '#' are skipped.
inline ZoneMapping parse_zone_mapping(std::string_view text) {
  ZoneMapping m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorKind::Config, "zone mapping line " + std::to_string(line_no) + " lacks '='");
    m.zones[std::string(detail::trim(t.substr(0, eq)))] = parse_zone(detail::trim(t.substr(eq + 1)));
  }
  return m;
}

inline ZoneMapping load_zone_mapping(const std::filesystem::path& path) { return parse_zone_mapping(read_file(path)); }

inline std::string beacon_column(std::size_t i) { return "b" + std::to_string(3001 + i); }

inline ClassificationDataset ibeacon_from_table(const CsvTable& table, const ZoneMapping& zones) {
  const std::size_t loc = table.require_column("location");
  std::vector<std::size_t> cols;
  for (std::size_t b = 0; b < kBeaconCount; ++b) cols.push_back(table.require_column(beacon_column(b)));
  ClassificationDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(kBeaconCount));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t b = 0; b < kBeaconCount; ++b) {
      ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = cell_number(table, r, cols[b]);
    }
    const auto& label = table.rows[r][loc];
    try {
      ds.labels.push_back(zones.zone_of(label));
    } catch (const Error&) {
      throw Error(ErrorKind::UnmappedLocation, "row " + std::to_string(r + 1) + ": location '" + label + "' has no zone");
    }
    ds.locations.push_back(label);
  }
  return ds;
}

inline ClassificationDataset load_ibeacon_csv(const std::filesystem::path& path, const ZoneMapping& zones) {
  return ibeacon_from_table(read_csv(path), zones);
}

/// location, b3001..b3013, A, B, C, D (one-hot).
inline CsvTable ibeacon_table(const ClassificationDataset& ds) {
  CsvTable t;
  t.header.emplace_back("location");
  for (std::size_t b = 0; b < static_cast<std::size_t>(ds.features.cols()); ++b) t.header.push_back(beacon_column(b));
  for (std::size_t z = 0; z < ds.class_count; ++z) t.header.emplace_back(1, zone_letter(z));
  const Eigen::MatrixXd hot = ds.one_hot();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    std::vector<std::string> row;
    row.push_back(r < ds.locations.size() ? ds.locations[r] : std::string(1, zone_letter(ds.labels[r])));
    for (Eigen::Index b = 0; b < ds.features.cols(); ++b) row.push_back(format_double(ds.features(i, b)));
    for (Eigen::Index z = 0; z < hot.cols(); ++z) row.push_back(hot(i, z) != 0.0 ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline void write_csv(const ClassificationDataset& ds, const std::filesystem::path& path) { write_csv(ibeacon_table(ds), path); }

}  // namespace rssiloc
