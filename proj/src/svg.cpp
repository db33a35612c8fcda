#include "chpt/svg.hpp"

#include <cmath>
#include <cstdio>

namespace chpt {

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

namespace {

void append_class(std::string& s, std::string_view css_class) {
  if (!css_class.empty()) {
    s += " class=\"";
    s += css_class;
    s += "\"";
  }
}

std::string escape_text(std::string_view content) {
  std::string out;
  for (char c : content) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

SvgCanvas::SvgCanvas(double width, double height) {
  body_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_coord(width) +
          "\" height=\"" + format_coord(height) + "\" viewBox=\"0 0 " +
          format_coord(width) + " " + format_coord(height) + "\">\n";
  body_ += "<rect x=\"0\" y=\"0\" width=\"" + format_coord(width) + "\" height=\"" +
           format_coord(height) + "\" fill=\"white\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, std::string_view style,
                     std::string_view css_class) {
  std::string s = "<line";
  append_class(s, css_class);
  s += " x1=\"" + format_coord(x1) + "\" y1=\"" + format_coord(y1) + "\" x2=\"" +
       format_coord(x2) + "\" y2=\"" + format_coord(y2) + "\" style=\"";
  s += style;
  s += "\"/>\n";
  body_ += s;
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         std::string_view style, std::string_view css_class) {
  std::string s = "<polyline";
  append_class(s, css_class);
  s += " fill=\"none\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += format_coord(pts[i].first) + "," + format_coord(pts[i].second);
  }
  s += "\" style=\"";
  s += style;
  s += "\"/>\n";
  body_ += s;
}

void SvgCanvas::polygon(const std::vector<std::pair<double, double>>& pts,
                        std::string_view style, std::string_view css_class) {
  std::string s = "<polygon";
  append_class(s, css_class);
  s += " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += format_coord(pts[i].first) + "," + format_coord(pts[i].second);
  }
  s += "\" style=\"";
  s += style;
  s += "\"/>\n";
  body_ += s;
}

void SvgCanvas::circle(double cx, double cy, double r, std::string_view style,
                       std::string_view css_class) {
  std::string s = "<circle";
  append_class(s, css_class);
  s += " cx=\"" + format_coord(cx) + "\" cy=\"" + format_coord(cy) + "\" r=\"" +
       format_coord(r) + "\" style=\"";
  s += style;
  s += "\"/>\n";
  body_ += s;
}

void SvgCanvas::rect(double x, double y, double w, double h, std::string_view style,
                     std::string_view css_class) {
  std::string s = "<rect";
  append_class(s, css_class);
  s += " x=\"" + format_coord(x) + "\" y=\"" + format_coord(y) + "\" width=\"" +
       format_coord(w) + "\" height=\"" + format_coord(h) + "\" style=\"";
  s += style;
  s += "\"/>\n";
  body_ += s;
}

void SvgCanvas::text(double x, double y, std::string_view content, std::string_view style,
                     std::string_view anchor) {
  std::string s = "<text x=\"" + format_coord(x) + "\" y=\"" + format_coord(y) +
                  "\" text-anchor=\"";
  s += anchor;
  s += "\" style=\"";
  s += style;
  s += "\">";
  s += escape_text(content);
  s += "</text>\n";
  body_ += s;
}

std::string SvgCanvas::finish() && {
  body_ += "</svg>\n";
  return std::move(body_);
}

std::vector<double> nice_ticks(double lo, double hi, int ticks) {
  if (!(hi > lo)) {
    double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi = lo + 2 * pad;
  }
  double raw_step = (hi - lo) / std::max(ticks - 1, 1);
  double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double norm = raw_step / mag;
  double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  double first = std::ceil(lo / step) * step;
  for (double v = first; v <= hi + 0.5 * step; v += step) {
    // snap values like 1.0000000000000002 back to the grid
    double snapped = std::round(v / step) * step;
    out.push_back(snapped == 0.0 ? 0.0 : snapped);
  }
  return out;
}

}  // namespace chpt
