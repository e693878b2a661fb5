#pragma once

#include <optional>
#include <vector>

#include "gridline/geometry.hpp"

namespace gridline {

/// Ordered 2D vertex list in image pixels, the ground-truth unit.
struct Polyline {
  std::vector<Vec2> points;
  std::optional<int> class_id;
};

/// Throws unless the polyline has >= 2 points and no consecutive duplicates.
void validate_polyline(const Polyline& p);

/// Total arc length in pixels.
double polyline_length(const Polyline& p);

}  // namespace gridline
