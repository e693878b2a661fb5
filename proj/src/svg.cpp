#include "gridline/svg.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace gridline {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string rgb(double r, double g, double b) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(r * 255.0)),
                static_cast<int>(std::lround(g * 255.0)),
                static_cast<int>(std::lround(b * 255.0)));
  return buf;
}

// Fixed instance palette, cycled.
const char* kPalette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231",
                          "#911eb4", "#46f0f0", "#f032e6", "#bcf60c",
                          "#008080", "#9a6324"};

}  // namespace

std::string orientation_color(double alpha) {
  // Hue wheel: angle in [0,2pi) -> HSV with s=v=1.
  double h = alpha / (2.0 * std::numbers::pi);
  h -= std::floor(h);
  const double x = 1.0 - std::abs(std::fmod(h * 6.0, 2.0) - 1.0);
  switch (static_cast<int>(h * 6.0) % 6) {
    case 0: return rgb(1, x, 0);
    case 1: return rgb(x, 1, 0);
    case 2: return rgb(0, 1, x);
    case 3: return rgb(0, x, 1);
    case 4: return rgb(x, 0, 1);
    default: return rgb(1, 0, x);
  }
}

std::string render_svg(const SvgScene& scene) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << scene.width
      << "\" height=\"" << scene.height << "\" viewBox=\"0 0 " << scene.width
      << " " << scene.height << "\">\n";
  if (!scene.header_comment.empty())
    out << "<!-- " << scene.header_comment << " -->\n";
  out << "<rect width=\"" << scene.width << "\" height=\"" << scene.height
      << "\" fill=\"#101010\"/>\n";

  if (scene.grid.has_value()) {
    out << "<g stroke=\"#333333\" stroke-width=\"0.5\">\n";
    const GridSpec& g = *scene.grid;
    for (int c = 0; c <= g.cols(); ++c) {
      const double x = c * g.cell_px();
      out << "<line x1=\"" << fmt(x) << "\" y1=\"0\" x2=\"" << fmt(x)
          << "\" y2=\"" << scene.height << "\"/>\n";
    }
    for (int r = 0; r <= g.rows(); ++r) {
      const double y = r * g.cell_px();
      out << "<line x1=\"0\" y1=\"" << fmt(y) << "\" x2=\"" << scene.width
          << "\" y2=\"" << fmt(y) << "\"/>\n";
    }
    out << "</g>\n";
  }

  if (!scene.segments.empty()) {
    out << "<g stroke-width=\"2\" stroke-linecap=\"round\">\n";
    for (const ImageSegment& s : scene.segments) {
      const Vec2 d = s.end - s.start;
      double alpha = std::atan2(d.y, d.x);
      if (alpha < 0.0) alpha += 2.0 * std::numbers::pi;
      out << "<line x1=\"" << fmt(s.start.x) << "\" y1=\"" << fmt(s.start.y)
          << "\" x2=\"" << fmt(s.end.x) << "\" y2=\"" << fmt(s.end.y)
          << "\" stroke=\"" << orientation_color(alpha) << "\" opacity=\""
          << fmt(0.25 + 0.75 * s.confidence) << "\"/>\n";
    }
    out << "</g>\n";
  }

  if (!scene.polylines.empty()) {
    out << "<g fill=\"none\" stroke-width=\"1.5\">\n";
    for (size_t i = 0; i < scene.polylines.size(); ++i) {
      const Polyline& p = scene.polylines[i];
      const int color_index =
          scene.polyline_coloring == PolylineColoring::kClass
              ? p.class_id.value_or(0)
              : static_cast<int>(i);
      out << "<polyline stroke=\""
          << kPalette[color_index % (sizeof(kPalette) / sizeof(kPalette[0]))]
          << "\" points=\"";
      for (size_t k = 0; k < p.points.size(); ++k) {
        if (k > 0) out << " ";
        out << fmt(p.points[k].x) << "," << fmt(p.points[k].y);
      }
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gridline
