#pragma once

// Line-oriented run report: `key<TAB>value` header lines, then a blank line
// and a fixed-width metrics table.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rssiloc/eval.hpp"
#include "rssiloc/ingest.hpp"

namespace rssiloc {

struct Report {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> table;  // preformatted lines

  void add(std::string key, std::string value) { entries.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), format_double(value)); }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : entries) out += k + '\t' + v + '\n';
    if (!table.empty()) {
      out += '\n';
      for (const auto& line : table) out += line + '\n';
    }
    return out;
  }
};

inline std::string fixed(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

/// Adds rmse/mae/std/r2 entries under `prefix` and a table row.
inline void add_metrics(Report& r, const std::string& prefix, const RegressionMetrics& m) {
  r.add(prefix + "rmse", m.rmse);
  r.add(prefix + "mae", m.mae);
  r.add(prefix + "std", m.std_err);
  r.add(prefix + "r2", m.r2 ? format_double(*m.r2) : std::string("undefined"));
  if (r.table.empty()) {
    char head[128];
    std::snprintf(head, sizeof head, "%-12s %12s %12s %12s %12s", "target", "rmse", "mae", "std", "r2");
    r.table.emplace_back(head);
  }
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %12s %12s", prefix.empty() ? "all" : prefix.substr(0, prefix.size() - 1).c_str(),
                fixed(m.rmse).c_str(), fixed(m.mae).c_str(), fixed(m.std_err).c_str(), m.r2 ? fixed(*m.r2).c_str() : "n/a");
  r.table.emplace_back(line);
}

inline void add_metrics(Report& r, const ClassificationMetrics& m) {
  r.add("accuracy", m.overall_accuracy);
  r.add("macro_accuracy", m.macro.accuracy);
  r.add("macro_precision", m.macro.precision);
  r.add("macro_sensitivity", m.macro.sensitivity);
  r.add("macro_f1", m.macro.f1);
  r.add("degenerate", m.macro.degenerate ? "true" : "false");
  char head[128];
  std::snprintf(head, sizeof head, "%-6s %10s %10s %11s %10s %8s", "class", "accuracy", "precision", "sensitivity", "f1", "support");
  r.table.emplace_back(head);
  auto row = [&](const std::string& name, const ClassScores& s) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %10s %10s %11s %10s %8zu", name.c_str(), fixed(s.accuracy).c_str(), fixed(s.precision).c_str(),
                  fixed(s.sensitivity).c_str(), fixed(s.f1).c_str(), s.support);
    r.table.emplace_back(line);
  };
  for (std::size_t k = 0; k < m.per_class.size(); ++k) row(std::string(1, static_cast<char>('A' + k)), m.per_class[k]);
  row("macro", m.macro);
}

inline void write_report(const Report& r, const std::filesystem::path& path) { write_file_atomic(path, r.text()); }

}  // namespace rssiloc
