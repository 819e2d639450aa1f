#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cidp::bench {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool step = false;  // draw as a staircase (CDFs)
};

// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace cidp::bench
