#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace flowvs {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  // Fixed y range when y_min < y_max; otherwise fitted to the data.
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Panels stacked vertically in one SVG document. Non-finite points are
/// dropped. Output depends only on the input.
std::string render_svg(const std::vector<Chart>& panels);

/// Chooses charts from the CSV header: a trajectory gives error and velocity
/// panels, a sweep gives ratio vs offset, a bench report gives final error
/// per task. Throws FormatError on anything else.
std::string render_plots(std::string_view csv);

}  // namespace flowvs
