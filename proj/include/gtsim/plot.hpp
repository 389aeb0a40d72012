#pragma once

#include "gtsim/harness.hpp"

#include <string>
#include <vector>

namespace gtsim {

struct PlotSeries {
  std::string label;
  std::vector<IterRecord> records;
};

/// Standalone SVG: log-scale suboptimality (left) and consensus error
/// (right) against iteration, one polyline per series, shared legend.
/// Non-positive values are clamped to the smallest positive value plotted.
std::string render_svg(const std::vector<PlotSeries>& series);

/// Labels come from each trace's config label. Throws std::invalid_argument
/// on an empty list.
void emit_plot(const std::vector<Trace>& traces, const std::string& path);
void emit_plot(const std::vector<PlotSeries>& series, const std::string& path);

}  // namespace gtsim
