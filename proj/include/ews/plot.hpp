#pragma once

// Standalone SVG log-log plots of sweeps against -p.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ews/scaling.hpp"

namespace ews {

struct PlotSeries {
  std::string label;
  SweepResult sweep;
  std::string colour = "#1f77b4";
  bool markers = true;
};

/// Line of slope `slope` in log10 axes through (x0, y0) = (log10(-p), log10 V).
struct ReferenceLine {
  double slope = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;
  std::string label;
};

struct PlotSpec {
  std::string title;
  std::vector<PlotSeries> series;
  std::optional<ReferenceLine> reference;
  std::vector<std::string> annotations;
  int width = 640;
  int height = 440;
};

void write_loglog_svg(std::ostream& os, const PlotSpec& spec);

}  // namespace ews
