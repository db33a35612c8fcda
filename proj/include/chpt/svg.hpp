#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chpt {

// Margins and pixel size shared by all plots; tests reconstruct the
// data-to-pixel affine map from these defaults.
struct PlotLayout {
  double width = 720.0;
  double height = 480.0;
  double margin_left = 64.0;
  double margin_right = 20.0;
  double margin_top = 28.0;
  double margin_bottom = 48.0;

  double plot_width() const { return width - margin_left - margin_right; }
  double plot_height() const { return height - margin_top - margin_bottom; }
};

// Affine map from a data interval to a pixel interval.
struct AxisScale {
  double data_min = 0.0;
  double data_max = 1.0;
  double pix_min = 0.0;
  double pix_max = 1.0;

  double operator()(double v) const {
    double t = (v - data_min) / (data_max - data_min);
    return pix_min + t * (pix_max - pix_min);
  }
};

// Minimal deterministic SVG writer: fixed 2-decimal coordinates, attributes
// emitted in call order, no timestamps.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void line(double x1, double y1, double x2, double y2, std::string_view style,
            std::string_view css_class = {});
  void polyline(const std::vector<std::pair<double, double>>& pts,
                std::string_view style, std::string_view css_class = {});
  void polygon(const std::vector<std::pair<double, double>>& pts,
               std::string_view style, std::string_view css_class = {});
  void circle(double cx, double cy, double r, std::string_view style,
              std::string_view css_class = {});
  void rect(double x, double y, double w, double h, std::string_view style,
            std::string_view css_class = {});
  void text(double x, double y, std::string_view content, std::string_view style,
            std::string_view anchor = "start");

  std::string finish() &&;

 private:
  std::string body_;
};

// round data bounds outward to about `ticks` pleasant steps
std::vector<double> nice_ticks(double lo, double hi, int ticks);

std::string format_coord(double v);
std::string format_tick(double v);

}  // namespace chpt
