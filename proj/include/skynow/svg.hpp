#pragma once

#include <string>
#include <vector>

namespace skynow {

struct SvgSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x, y;
};

/// Minimal line plot (axes, ticks, legend), no external dependencies.
void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series);

/// Row-major heat map with a symmetric blue-white-red scale around zero.
void write_svg_heatmap(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<double>& col_values,
                       const std::string& col_label,
                       const std::vector<std::vector<double>>& cells);

}  // namespace skynow
