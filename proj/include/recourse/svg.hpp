#pragma once

#include <string>
#include <utility>
#include <vector>

namespace recourse {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool markers_only = false;  // draw stars instead of a polyline
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;

  /// Standalone SVG document with axes, ticks and a legend.
  std::string render(int width = 640, int height = 440) const;
};

}  // namespace recourse
