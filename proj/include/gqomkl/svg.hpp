#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gqomkl {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// round limits outward to a "nice" step (1, 2 or 5 times a power of ten)
struct Axis {
  double lo, hi, step;
};

inline Axis nice_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    lo -= pad;
    hi += pad;
  }
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  Axis a;
  a.step = step;
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  return a;
}

}  // namespace detail

// Self-contained multi-series line chart; no external tooling needed to view
// the output.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
  if (series.empty()) throw std::invalid_argument("write_line_chart: no series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw std::invalid_argument("write_line_chart: series '" + s.label +
                                  "' is empty or has mismatched lengths");
    for (double v : s.x) {
      if (!std::isfinite(v)) throw std::invalid_argument("write_line_chart: non-finite x value");
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) throw std::invalid_argument("write_line_chart: non-finite y value");
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  const detail::Axis ax = detail::nice_axis(xmin, xmax);
  const detail::Axis ay = detail::nice_axis(ymin, ymax);

  const double width = 960, height = 540;
  const double ml = 80, mr = 30, mt = 50, mb = 60;  // margins
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int palette_size = 8;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_line_chart: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"18\" "
         "text-anchor=\"middle\">"
      << title << "</text>\n";

  out << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333\">\n";
  for (double x = ax.lo; x <= ax.hi + ax.step * 0.5; x += ax.step) {
    const double gx = px(x);
    out << "<line x1=\"" << detail::svg_num(gx) << "\" y1=\"" << mt << "\" x2=\""
        << detail::svg_num(gx) << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << detail::svg_num(gx) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << detail::svg_num(x) << "</text>\n";
  }
  for (double y = ay.lo; y <= ay.hi + ay.step * 0.5; y += ay.step) {
    const double gy = py(y);
    out << "<line x1=\"" << ml << "\" y1=\"" << detail::svg_num(gy) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << detail::svg_num(gy) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << ml - 8 << "\" y=\"" << detail::svg_num(gy + 4)
        << "\" text-anchor=\"end\">" << detail::svg_num(y) << "</text>\n";
  }
  out << "</g>\n";

  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << mt + ph / 2
      << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "20 "
      << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    out << "<polyline fill=\"none\" stroke=\"" << palette[si % palette_size]
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << ' ';
      out << detail::svg_num(px(s.x[i])) << ',' << detail::svg_num(py(s.y[i]));
    }
    out << "\"/>\n";
  }

  const double lx = ml + pw - 220, ly = mt + 12;
  out << "<g font-family=\"sans-serif\" font-size=\"13\">\n";
  out << "<rect x=\"" << lx - 10 << "\" y=\"" << ly - 12 << "\" width=\"230\" height=\""
      << 20 * series.size() + 10 << "\" fill=\"white\" fill-opacity=\"0.85\" stroke=\"#999\"/>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double yy = ly + 20 * static_cast<double>(si);
    out << "<line x1=\"" << lx << "\" y1=\"" << yy << "\" x2=\"" << lx + 26 << "\" y2=\"" << yy
        << "\" stroke=\"" << palette[si % palette_size] << "\" stroke-width=\"2.5\"/>\n"
        << "<text x=\"" << lx + 34 << "\" y=\"" << yy + 4 << "\">" << series[si].label
        << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  if (!out) throw std::runtime_error("write_line_chart: write failed for " + path);
}

}  // namespace gqomkl
