#pragma once

// Per-trojan result tables (detection metrics grid and the HTM accuracy
// comparison) rendered as text, CSV and JSON.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "htdetect/classifiers.hpp"
#include "htdetect/error.hpp"
#include "htdetect/metrics.hpp"

namespace htdetect {

/// trojan id -> model kind name -> report
using BenchmarkResults = std::map<std::string, std::map<std::string, MetricsReport>>;

inline constexpr int kReportFormatVersion = 1;

/// Published HTM detector accuracies (%) used as the comparison baseline.
inline const std::map<std::string, double>& htm_reference_accuracy() {
  static const std::map<std::string, double> ref = {
      {"T500", 100.0}, {"T600", 63.5}, {"T700", 98.1}, {"T800", 100.0}, {"T1600", 59.6}};
  return ref;
}

inline constexpr const char* kUndefinedCell = "—";

/// "T1000" sorts after "T500": numeric suffixes compare by value.
inline bool trojan_less(const std::string& a, const std::string& b) {
  auto split = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) --i;
    const std::string digits = s.substr(i);
    return std::pair{s.substr(0, i), digits.empty() ? -1.0 : std::stod(digits)};
  };
  const auto [pa, na] = split(a);
  const auto [pb, nb] = split(b);
  if (pa != pb) return pa < pb;
  if (na != nb) return na < nb;
  return a < b;
}

inline std::vector<std::string> ordered_trojans(const BenchmarkResults& results) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : results) ids.push_back(id);
  std::sort(ids.begin(), ids.end(), trojan_less);
  return ids;
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const MetricsReport& r) {
  auto roc = nlohmann::json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  return {{"trojan_id", r.trojan_id},
          {"model", r.model},
          {"metrics",
           {{"accuracy", r.accuracy},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1},
            {"auc", r.auc}}},
          {"undefined", r.undefined},
          {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
          {"roc", roc}};
}

inline MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.trojan_id = j.at("trojan_id").get<std::string>();
  r.model = j.at("model").get<std::string>();
  const auto& m = j.at("metrics");
  r.accuracy = m.at("accuracy").get<double>();
  r.precision = m.at("precision").get<double>();
  r.recall = m.at("recall").get<double>();
  r.f1 = m.at("f1").get<double>();
  r.auc = m.at("auc").get<double>();
  r.undefined = j.at("undefined").get<std::vector<std::string>>();
  const auto& c = j.at("confusion");
  r.confusion = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(),
                 c.at("tn").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
  for (const auto& p : j.at("roc")) r.roc.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return r;
}

struct ComparisonRow {
  std::string trojan_id;
  std::string best_model;
  double best_accuracy = 0.0;  // percent
  std::optional<double> htm_accuracy;
  std::optional<double> difference;  // best - htm, percentage points rounded to 0.1
};

/// Best accuracy per trojan (first model in display order wins ties) against
/// the HTM reference, where one exists.
inline std::vector<ComparisonRow> comparison_rows(const BenchmarkResults& results) {
  std::vector<ComparisonRow> rows;
  for (const auto& id : ordered_trojans(results)) {
    const auto& models = results.at(id);
    ComparisonRow row;
    row.trojan_id = id;
    bool any = false;
    auto consider = [&](const std::string& name, const MetricsReport& r) {
      const double acc = std::stod(percent(r.accuracy));
      if (!any || acc > row.best_accuracy) {
        row.best_accuracy = acc;
        row.best_model = name;
        any = true;
      }
    };
    for (auto kind : kAllModelKinds) {
      const std::string name(to_string(kind));
      if (auto it = models.find(name); it != models.end()) consider(name, it->second);
    }
    for (const auto& [name, r] : models)
      if (!model_kind_from_string(name)) consider(name, r);
    if (!any) continue;
    if (auto it = htm_reference_accuracy().find(id); it != htm_reference_accuracy().end()) {
      row.htm_accuracy = it->second;
      row.difference = std::round((row.best_accuracy - it->second) * 10.0) / 10.0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json results_to_json(const BenchmarkResults& results) {
  auto arr = nlohmann::json::array();
  for (const auto& id : ordered_trojans(results)) {
    const auto& models = results.at(id);
    for (auto kind : kAllModelKinds)
      if (auto it = models.find(std::string(to_string(kind))); it != models.end())
        arr.push_back(to_json(it->second));
    for (const auto& [name, r] : models)
      if (!model_kind_from_string(name)) arr.push_back(to_json(r));
  }
  auto cmp = nlohmann::json::array();
  for (const auto& row : comparison_rows(results)) {
    cmp.push_back({{"trojan_id", row.trojan_id},
                   {"best_model", row.best_model},
                   {"best_accuracy", row.best_accuracy},
                   {"htm_accuracy", row.htm_accuracy ? nlohmann::json(*row.htm_accuracy) : nlohmann::json()},
                   {"difference", row.difference ? nlohmann::json(*row.difference) : nlohmann::json()}});
  }
  return {{"format_version", kReportFormatVersion}, {"results", arr}, {"comparison", cmp}};
}

inline BenchmarkResults results_from_json(const nlohmann::json& doc) {
  if (!doc.contains("format_version") || doc["format_version"] != kReportFormatVersion)
    throw FormatVersionError("unsupported report format_version");
  BenchmarkResults out;
  try {
    for (const auto& j : doc.at("results")) {
      auto r = metrics_report_from_json(j);
      auto id = r.trojan_id;
      auto model = r.model;
      out[id][model] = std::move(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed report: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct BenchmarkReport {
  std::string metrics_table;      // trojan x metric x model grid, UTF-8 text
  std::string metrics_csv;
  std::string comparison_table;   // best accuracy vs HTM, UTF-8 text
  std::string comparison_csv;
  nlohmann::json json;
};

namespace detail {

struct MetricRow {
  const char* label;
  double MetricsReport::*field;
  const char* key;
};

inline constexpr MetricRow kMetricRows[] = {
    {"Accuracy", &MetricsReport::accuracy, "accuracy"},
    {"F1", &MetricsReport::f1, "f1"},
    {"Precision", &MetricsReport::precision, "precision"},
    {"Recall", &MetricsReport::recall, "recall"},
    {"AUC", &MetricsReport::auc, "auc"},
};

// Width in terminal columns; the em dash is 3 bytes but one column.
inline std::size_t display_width(std::string_view s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

inline std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(widths[c] - display_width(row[c]) + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

inline std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  return out.str();
}

inline std::string signed_one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f", v);
  return buf;
}

}  // namespace detail

inline BenchmarkReport benchmark_report(const BenchmarkResults& results) {
  BenchmarkReport report;
  std::vector<std::string> columns;
  for (auto kind : kAllModelKinds) columns.emplace_back(to_string(kind));
  for (const auto& [_, models] : results)
    for (const auto& [name, _r] : models)
      if (!model_kind_from_string(name) && std::find(columns.begin(), columns.end(), name) == columns.end())
        columns.push_back(name);

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Trojan", "Metric"};
  for (const auto& c : columns) {
    const auto k = model_kind_from_string(c);
    header.emplace_back(k ? std::string(display_name(*k)) : c);
  }
  grid.push_back(header);
  bool footnote = false;
  for (const auto& id : ordered_trojans(results)) {
    const auto& models = results.at(id);
    bool first = true;
    for (const auto& metric : detail::kMetricRows) {
      std::vector<std::string> row{first ? id : "", metric.label};
      first = false;
      for (const auto& c : columns) {
        auto it = models.find(c);
        if (it == models.end()) {
          row.emplace_back("");
        } else if (it->second.is_undefined(metric.key)) {
          row.emplace_back(kUndefinedCell);
          footnote = true;
        } else {
          row.push_back(percent(it->second.*metric.field));
        }
      }
      grid.push_back(std::move(row));
    }
  }
  report.metrics_table = "Trojan Detection Performance (%)\n" + detail::render_grid(grid);
  if (footnote)
    report.metrics_table += std::string(kUndefinedCell) + " undefined: zero denominator\n";

  // CSV repeats the trojan id on every row.
  std::vector<std::vector<std::string>> csv_grid = grid;
  std::string current;
  for (std::size_t r = 1; r < csv_grid.size(); ++r) {
    if (!csv_grid[r][0].empty()) current = csv_grid[r][0];
    csv_grid[r][0] = current;
  }
  report.metrics_csv = detail::render_csv(csv_grid);

  std::vector<std::vector<std::string>> cmp{
      {"Trojan", "Highest Accuracy", "Best Model", "HTM Method", "Difference"}};
  for (const auto& row : comparison_rows(results)) {
    char best[32];
    std::snprintf(best, sizeof(best), "%.1f", row.best_accuracy);
    const auto k = model_kind_from_string(row.best_model);
    std::string htm = kUndefinedCell, diff = kUndefinedCell;
    if (row.htm_accuracy) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", *row.htm_accuracy);
      htm = buf;
      diff = detail::signed_one_decimal(*row.difference);
    }
    cmp.push_back({row.trojan_id, best, k ? std::string(display_name(*k)) : row.best_model, htm, diff});
  }
  report.comparison_table = "Accuracy Comparison with HTM model (%)\n" + detail::render_grid(cmp);
  report.comparison_csv = detail::render_csv(cmp);
  report.json = results_to_json(results);
  return report;
}

}  // namespace htdetect
