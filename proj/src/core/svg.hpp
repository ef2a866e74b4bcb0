#pragma once

#include <string>
#include <vector>

namespace gpelab {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

/// Self-contained SVG line plot with markers. Non-finite (or, on log axes,
/// non-positive) points are skipped.
std::string render_svg(const Plot& plot);

}  // namespace gpelab
