#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "panelseg/csv.hpp"
#include "panelseg/errors.hpp"

namespace panelseg {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

// Minimal static line chart. NaN points are skipped (they split the line).
inline void write_line_chart_svg(const std::string& path, const std::string& title,
                                 const std::string& xlabel, const std::string& ylabel,
                                 const std::vector<SvgSeries>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 640, height = 420;
  const double left = 64, right = 24, top = 40, bottom = 52;

  double xmin = NAN, xmax = NAN, ymin = NAN, ymax = NAN;
  for (const auto& s : series) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (std::isnan(s.x[j]) || std::isnan(s.y[j])) continue;
      if (std::isnan(xmin) || s.x[j] < xmin) xmin = s.x[j];
      if (std::isnan(xmax) || s.x[j] > xmax) xmax = s.x[j];
      if (std::isnan(ymin) || s.y[j] < ymin) ymin = s.y[j];
      if (std::isnan(ymax) || s.y[j] > ymax) ymax = s.y[j];
    }
  }
  if (std::isnan(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  if (xmax == xmin) { xmax = xmin + 1; xmin -= 1; }
  if (ymax == ymin) { ymax = ymin + 1; ymin -= 1; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom); };
  auto fmt = [](double v) { return detail::format_double(v); };

  auto f = detail::open_out(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
       "font-family=\"sans-serif\">" << title << "</text>\n";

  // axes with 5 ticks each
  f << "<g stroke=\"#333\" stroke-width=\"1\" font-size=\"11\" font-family=\"sans-serif\">\n";
  f << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right
    << "\" y2=\"" << height - bottom << "\"/>\n";
  f << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
    << height - bottom << "\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    f << "<line x1=\"" << px(xv) << "\" y1=\"" << height - bottom << "\" x2=\"" << px(xv)
      << "\" y2=\"" << height - bottom + 4 << "\"/>\n";
    f << "<text x=\"" << px(xv) << "\" y=\"" << height - bottom + 16
      << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << fmt(xv) << "</text>\n";
    f << "<line x1=\"" << left - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\""
      << py(yv) << "\"/>\n";
    f << "<text x=\"" << left - 7 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" stroke=\"none\" fill=\"#333\">" << fmt(yv) << "</text>\n";
  }
  f << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
    << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\">" << xlabel << "</text>\n";
  f << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
    << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333\" transform=\"rotate(-90 16 "
    << (top + height - bottom) / 2 << ")\">" << ylabel << "</text>\n";
  f << "</g>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % 8];
    std::string d;
    bool pen_down = false;
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (std::isnan(s.x[j]) || std::isnan(s.y[j])) { pen_down = false; continue; }
      d += pen_down ? " L" : " M";
      d += fmt(px(s.x[j])) + " " + fmt(py(s.y[j]));
      pen_down = true;
    }
    if (!d.empty())
      f << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\"/>\n";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (std::isnan(s.x[j]) || std::isnan(s.y[j])) continue;
      f << "<circle cx=\"" << fmt(px(s.x[j])) << "\" cy=\"" << fmt(py(s.y[j]))
        << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    // legend entry
    const double ly = top + 6 + 16.0 * static_cast<double>(si);
    f << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly << "\" x2=\""
      << width - right - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << width - right - 120 << "\" y=\"" << ly + 4
      << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#333\">" << s.label
      << "</text>\n";
  }
  f << "</svg>\n";
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace panelseg
