#include "gtsim/plot.hpp"
#include "gtsim/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace gtsim {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 300.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginT = 40.0;
constexpr double kGap = 90.0;
constexpr double kLegendRow = 18.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // Drop control characters that XML 1.0 forbids.
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\t' || c == '\n') out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
};

using Field = double IterRecord::*;

void draw_panel(std::string& svg, const std::vector<PlotSeries>& series, Field field,
                const std::string& title, double x0) {
  Range tr;
  double min_pos = std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (const auto& r : s.records) {
      tr.add(static_cast<double>(r.t));
      const double v = r.*field;
      if (v > 0.0 && std::isfinite(v)) min_pos = std::min(min_pos, v);
    }
  }
  if (!std::isfinite(min_pos)) min_pos = 1e-300;
  Range yr;
  for (const auto& s : series) {
    for (const auto& r : s.records) {
      const double v = r.*field;
      if (std::isfinite(v)) yr.add(std::log10(std::max(v, min_pos)));
    }
  }
  if (tr.empty()) tr = {0.0, 1.0};
  if (tr.hi == tr.lo) tr.hi = tr.lo + 1.0;
  if (yr.empty()) yr = {0.0, 1.0};
  yr.lo = std::floor(yr.lo);
  yr.hi = std::ceil(yr.hi);
  if (yr.hi == yr.lo) yr.hi = yr.lo + 1.0;

  const double y0 = kMarginT;
  auto px = [&](double t) { return x0 + (t - tr.lo) / (tr.hi - tr.lo) * kPanelW; };
  auto py = [&](double lv) { return y0 + kPanelH - (lv - yr.lo) / (yr.hi - yr.lo) * kPanelH; };

  svg += "<g>\n";
  svg += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(kPanelW) + "\" height=\"" +
         num(kPanelH) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg += "<text x=\"" + num(x0 + kPanelW / 2) + "\" y=\"" + num(y0 - 12) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(title) + "</text>\n";

  const int decades = static_cast<int>(yr.hi - yr.lo);
  const int step = std::max(1, decades / 8);
  for (int k = static_cast<int>(yr.lo); k <= static_cast<int>(yr.hi); k += step) {
    const double y = py(k);
    svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0 + kPanelW) + "\" y2=\"" +
           num(y) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">1e" + std::to_string(k) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double t = tr.lo + (tr.hi - tr.lo) * k / 4.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.0f", t);
    svg += "<text x=\"" + num(px(t)) + "\" y=\"" + num(y0 + kPanelH + 16) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + label + "</text>\n";
  }
  svg += "<text x=\"" + num(x0 + kPanelW / 2) + "\" y=\"" + num(y0 + kPanelH + 34) +
         "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    std::string pts;
    for (const auto& r : series[i].records) {
      const double v = r.*field;
      if (!std::isfinite(v)) continue;
      if (!pts.empty()) pts += ' ';
      pts += num(px(static_cast<double>(r.t))) + "," + num(py(std::log10(std::max(v, min_pos))));
    }
    svg += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
           std::string(kColors[i % std::size(kColors)]) + "\" points=\"" + pts + "\"/>\n";
  }
  svg += "</g>\n";
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("emit_plot needs at least one trace");
  const double width = kMarginL + 2 * kPanelW + kGap + 30.0;
  const double legend_top = kMarginT + kPanelH + 50.0;
  const double height = legend_top + kLegendRow * static_cast<double>(series.size()) + 20.0;

  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  draw_panel(svg, series, &IterRecord::subopt, "suboptimality f(xbar) - f*", kMarginL);
  draw_panel(svg, series, &IterRecord::consensus_x, "consensus error |Pi x|^2", kMarginL + kPanelW + kGap);

  svg += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = legend_top + kLegendRow * static_cast<double>(i);
    const std::string color = kColors[i % std::size(kColors)];
    svg += "<line x1=\"" + num(kMarginL) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kMarginL + 24) + "\" y2=\"" +
           num(y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kMarginL + 30) + "\" y=\"" + num(y + 4) + "\" font-size=\"12\">" +
           xml_escape(series[i].label) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void emit_plot(const std::vector<PlotSeries>& series, const std::string& path) {
  write_text(path, render_svg(series));
}

void emit_plot(const std::vector<Trace>& traces, const std::string& path) {
  if (traces.empty()) throw std::invalid_argument("emit_plot needs at least one trace");
  std::vector<PlotSeries> series;
  for (const auto& t : traces) series.push_back({t.config.label, t.records});
  emit_plot(series, path);
}

}  // namespace gtsim
