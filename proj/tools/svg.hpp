#pragma once

#include <string>
#include <vector>

namespace berman::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  /// Draws y = x across the plot (P–P plots).
  bool diagonal = false;
};

/// Polyline plot with axes and tick labels. Non-finite points, and
/// non-positive ones on a log axis, are skipped.
std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace berman::cli
