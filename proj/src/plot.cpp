#include "ews/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace ews {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_loglog_svg(std::ostream& os, const PlotSpec& spec) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double xmin = inf, xmax = -inf, ymin = inf, ymax = -inf;
  for (const auto& s : spec.series) {
    for (const auto& pt : s.sweep.points) {
      const double x = std::log10(-pt.p), y = std::log10(pt.value);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = -1.0, xmax = 0.0, ymin = -1.0, ymax = 0.0;
  }
  if (spec.reference) {
    for (double x : {xmin, xmax}) {
      const double y = spec.reference->y0 + spec.reference->slope * (x - spec.reference->x0);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const double padx = 0.04 * (xmax - xmin), pady = 0.06 * (ymax - ymin);
  xmin -= padx, xmax += padx, ymin -= pady, ymax += pady;

  const double left = 70, right = 20, top = 40, bottom = 50;
  const double w = spec.width - left - right, h = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * w; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * h; };

  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Integer decade ticks where they fit, else 5 even ticks.
  auto ticks = [](double lo, double hi) {
    std::vector<double> t;
    for (double v = std::ceil(lo); v <= hi; v += 1.0) t.push_back(v);
    if (t.size() < 2) {
      t.clear();
      for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4.0);
    }
    return t;
  };
  for (double x : ticks(xmin, xmax)) {
    os << "<line x1=\"" << px(x) << "\" y1=\"" << top + h << "\" x2=\"" << px(x) << "\" y2=\"" << top + h + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << top + h + 18 << "\" text-anchor=\"middle\">" << std::setprecision(1)
       << x << std::setprecision(2) << "</text>\n";
  }
  for (double y : ticks(ymin, ymax)) {
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << left << "\" y2=\"" << py(y)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << std::setprecision(1) << y
       << std::setprecision(2) << "</text>\n";
  }
  os << "<text x=\"" << left + w / 2 << "\" y=\"" << spec.height - 10
     << "\" text-anchor=\"middle\">log10(-p)</text>\n";
  os << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + h / 2
     << ")\">log10(variance)</text>\n";

  if (spec.reference) {
    const auto& r = *spec.reference;
    const double y1 = r.y0 + r.slope * (xmin - r.x0), y2 = r.y0 + r.slope * (xmax - r.x0);
    os << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(y1) << "\" x2=\"" << px(xmax) << "\" y2=\"" << py(y2)
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (const auto& s : spec.series) {
    if (s.sweep.points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& pt : s.sweep.points) os << px(std::log10(-pt.p)) << ',' << py(std::log10(pt.value)) << ' ';
    os << "\"/>\n";
    if (s.markers) {
      for (const auto& pt : s.sweep.points) {
        os << "<circle cx=\"" << px(std::log10(-pt.p)) << "\" cy=\"" << py(std::log10(pt.value))
           << "\" r=\"2.5\" fill=\"" << s.colour << "\"/>\n";
      }
    }
  }

  // Legend and annotations.
  double ly = top + 16;
  auto legend = [&](const std::string& colour, const std::string& text, bool dashed) {
    os << "<line x1=\"" << left + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << colour << "\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << left + 36 << "\" y=\"" << ly << "\">" << escape(text) << "</text>\n";
    ly += 16;
  };
  for (const auto& s : spec.series) legend(s.colour, s.label, false);
  if (spec.reference) legend("gray", spec.reference->label, true);
  for (const auto& a : spec.annotations) {
    os << "<text x=\"" << left + 10 << "\" y=\"" << ly << "\">" << escape(a) << "</text>\n";
    ly += 16;
  }
  os << "</svg>\n";
}

}  // namespace ews
