#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridline/geometry.hpp"
#include "gridline/polyline.hpp"

namespace gridline {

enum class PolylineColoring { kInstance, kClass };

/// Layers of one rendered scene. Segments are colored by orientation hue,
/// polylines by instance or class.
struct SvgScene {
  int width = 0;
  int height = 0;
  std::optional<GridSpec> grid;
  std::vector<ImageSegment> segments;
  std::vector<Polyline> polylines;
  PolylineColoring polyline_coloring = PolylineColoring::kInstance;
  std::string header_comment;  // version/config echo
};

/// Deterministic SVG document (fixed float formatting, stable layer order).
std::string render_svg(const SvgScene& scene);

/// Hue color for a directed angle in [0, 2pi), as #rrggbb.
std::string orientation_color(double alpha);

}  // namespace gridline
