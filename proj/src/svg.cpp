#include "skynow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "skynow/common.hpp"

namespace skynow {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

std::string color_bwr(double t) {  // t in [-1, 1]
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t < 0) {  // blue -> white
    const double f = t + 1.0;
    r = static_cast<int>(40 + 215 * f);
    g = static_cast<int>(80 + 175 * f);
    b = 255;
  } else {  // white -> red
    r = 255;
    g = static_cast<int>(255 - 175 * t);
    b = static_cast<int>(255 - 215 * t);
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_svg_line_plot(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series) {
  const int w = 720, h = 480, ml = 70, mr = 170, mt = 40, mb = 55;
  Range xr, yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  if (!std::isfinite(xr.lo)) {
    xr = {0, 1};
    yr = {0, 1};
  }
  if (yr.hi == yr.lo) yr.hi = yr.lo + 1.0;

  auto px = [&](double x) { return ml + (x - xr.lo) / xr.span() * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - yr.lo) / yr.span() * (h - mt - mb); };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write SVG: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << title << "</text>\n";

  // axes and ticks
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + xr.span() * i / 5.0;
    const double yv = yr.lo + yr.span() * i / 5.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv)
        << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv)
        << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << w - mr
        << "\" y2=\"" << py(yv)
        << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
  }
  out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 "
      << "18 " << (mt + h - mb) / 2 << ")\">" << y_label << "</text>\n";

  int li = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
    out << "\"/>\n";
    const int ly = mt + 16 + 18 * li++;
    out << "<line x1=\"" << w - mr + 10 << "\" y1=\"" << ly << "\" x2=\""
        << w - mr + 34 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << w - mr + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

void write_svg_heatmap(const std::string& path, const std::string& title,
                       const std::vector<std::string>& row_labels,
                       const std::vector<double>& col_values,
                       const std::string& col_label,
                       const std::vector<std::vector<double>>& cells) {
  const int rows = static_cast<int>(cells.size());
  const int cols = rows > 0 ? static_cast<int>(cells[0].size()) : 0;
  const int ml = 110, mt = 40, mb = 60, mr = 80;
  const int cw = std::max(3, std::min(14, 560 / std::max(1, cols)));
  const int ch = 26;
  const int w = ml + cw * cols + mr;
  const int h = mt + ch * rows + mb;

  double amax = 1e-9;
  for (const auto& row : cells)
    for (double v : row) amax = std::max(amax, std::abs(v));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write SVG: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-size=\"15\">" << title << "</text>\n";

  for (int r = 0; r < rows; ++r) {
    out << "<text x=\"" << ml - 8 << "\" y=\"" << mt + r * ch + ch / 2 + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << row_labels[r]
        << "</text>\n";
    for (int c = 0; c < cols; ++c) {
      out << "<rect x=\"" << ml + c * cw << "\" y=\"" << mt + r * ch
          << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\""
          << color_bwr(cells[r][c] / amax) << "\"/>\n";
    }
  }
  // sparse column ticks
  const int tick_every = std::max(1, cols / 9);
  for (int c = 0; c < cols; c += tick_every)
    out << "<text x=\"" << ml + c * cw + cw / 2 << "\" y=\""
        << mt + rows * ch + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << fmt(col_values[c]) << "</text>\n";
  out << "<text x=\"" << ml + cw * cols / 2 << "\" y=\"" << h - 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << col_label
      << "</text>\n";
  out << "<text x=\"" << w - mr + 8 << "\" y=\"" << mt + 10
      << "\" font-size=\"10\">+" << fmt(amax) << "</text>\n";
  out << "<text x=\"" << w - mr + 8 << "\" y=\"" << mt + rows * ch
      << "\" font-size=\"10\">-" << fmt(amax) << "</text>\n";
  out << "</svg>\n";
}

}  // namespace skynow
