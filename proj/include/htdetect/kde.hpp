#pragma once

// Gaussian kernel density curves of one feature, per trojan state.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "htdetect/error.hpp"
#include "htdetect/features.hpp"

namespace htdetect {

struct KdeCurve {
  std::string feature;
  int label = 0;
  double bandwidth = 0.0;
  std::vector<double> x;
  std::vector<double> density;
};

struct KdePair {
  KdeCurve disabled;
  KdeCurve triggered;
};

/// Linear-interpolation quantile of sorted data, q in [0, 1].
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Silverman's rule 0.9 * min(sd, IQR / 1.34) * m^(-1/5), using whichever
/// spread measure is positive when the other vanishes; floored at 1e-12.
inline double silverman_bandwidth(std::span<const double> values) {
  const std::size_t m = values.size();
  if (m < 2) return 1e-12;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0)) spread = std::max(sd, iqr);
  return std::max(0.9 * spread * std::pow(static_cast<double>(m), -0.2), 1e-12);
}

/// density(x) = 1 / (m h) * sum phi((x - x_i) / h)
inline std::vector<double> kde_density(std::span<const double> values, std::span<const double> grid,
                                       double h) {
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double v : values) {
      const double z = (grid[g] - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y) {
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += (x[i] - x[i - 1]) * (y[i] + y[i - 1]) / 2.0;
  return area;
}

/// Area under min(f, g); both curves must share a grid.
inline double overlap_coefficient(const KdeCurve& a, const KdeCurve& b) {
  if (a.x != b.x) throw ShapeError("overlap needs curves on a shared grid");
  std::vector<double> lower(a.x.size());
  for (std::size_t i = 0; i < lower.size(); ++i) lower[i] = std::min(a.density[i], b.density[i]);
  return trapezoid(a.x, lower);
}

/// One curve per trojan state on a shared grid spanning
/// [min - 3h, max + 3h] with h the larger of the two bandwidths.
inline KdePair kde_export(std::span<const FeatureVector> vectors, const std::string& feature,
                          std::size_t grid_points = 512) {
  const std::size_t j = feature_index(feature);
  if (grid_points < 2) throw ConfigError("kde grid_points must be at least 2");
  std::vector<double> values[2];
  for (const auto& v : vectors) {
    if (v.schema != canonical_schema_fingerprint() || v.values.size() != kFeatureCount)
      throw SchemaError("kde expects canonical feature vectors");
    values[v.label != 0 ? 1 : 0].push_back(v.values[j]);
  }
  if (values[0].size() < 2 || values[1].size() < 2)
    throw ClassCoverageError("kde needs at least 2 vectors of each trojan state; got " +
                             std::to_string(values[0].size()) + " disabled and " +
                             std::to_string(values[1].size()) + " triggered");

  const double h0 = silverman_bandwidth(values[0]);
  const double h1 = silverman_bandwidth(values[1]);
  const double h = std::max(h0, h1);
  double lo = values[0].front(), hi = lo;
  for (const auto& vs : values)
    for (double v : vs) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  lo -= 3.0 * h;
  hi += 3.0 * h;
  std::vector<double> grid(grid_points);
  for (std::size_t g = 0; g < grid_points; ++g)
    grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);

  KdePair out;
  out.disabled = {feature, 0, h0, grid, kde_density(values[0], grid, h0)};
  out.triggered = {feature, 1, h1, grid, kde_density(values[1], grid, h1)};
  return out;
}

inline void write_kde_csv(const KdePair& kde, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,density_disabled,density_triggered\n";
  for (std::size_t i = 0; i < kde.disabled.x.size(); ++i)
    out << detail::format_real(kde.disabled.x[i]) << ',' << detail::format_real(kde.disabled.density[i])
        << ',' << detail::format_real(kde.triggered.density[i]) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Minimal standalone SVG line plot of both curves.
inline std::string render_kde_svg(const KdePair& kde, const std::string& title) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  const auto& xs = kde.disabled.x;
  const double x0 = xs.front(), x1 = xs.back();
  double ymax = 0.0;
  for (double d : kde.disabled.density) ymax = std::max(ymax, d);
  for (double d : kde.triggered.density) ymax = std::max(ymax, d);
  if (!(ymax > 0.0)) ymax = 1.0;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - y / ymax * (H - T - B); };

  auto polyline = [&](const std::vector<double>& d, const char* color) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    char buf[64];
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(xs[i]), py(d[i]));
      s << buf;
    }
    s << "\"/>\n";
    return s.str();
  };

  char buf[256];
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::xml_escape(title) << "</text>\n";
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n", L, H - B,
                W - R, H - B);
  svg << buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"black\"/>\n", L, T, L,
                H - B);
  svg << buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\">%.4g</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"end\">%.4g</text>\n",
                L, H - B + 16, x0, W - R, H - B + 16, x1);
  svg << buf;
  svg << polyline(kde.disabled.density, "#1f77b4");
  svg << polyline(kde.triggered.density, "#d62728");
  svg << "<text x=\"480\" y=\"60\" fill=\"#1f77b4\" font-family=\"sans-serif\" font-size=\"12\">disabled</text>\n";
  svg << "<text x=\"480\" y=\"78\" fill=\"#d62728\" font-family=\"sans-serif\" font-size=\"12\">triggered</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace htdetect
