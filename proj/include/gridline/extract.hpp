#pragma once

#include <vector>

#include "gridline/geometry.hpp"

namespace gridline {

struct ExtractConfig {
  double max_downward = 0.25;     // fraction of a cell
  double successor_radius = 0.75; // fraction of a cell
  int min_segments = 10;          // tau_s
  int spline_degree = 3;
  double spline_smoothing = 0.05;
  /// Whether the bottom-half-of-bottom-row rule removes successor candidates
  /// (default) or is ignored.
  bool restrict_bottom_candidates = true;
};

/// Removes segments descending by more than max_downward of a cell.
std::vector<ImageSegment> filter_downward(const std::vector<ImageSegment>& segments,
                                          const ExtractConfig& cfg,
                                          const GridSpec& spec);

/// Successor index per segment (-1 for none): the segment whose start point
/// is nearest to this segment's end point, within successor_radius cells and
/// outside the bottom half of the grid's bottom row.
std::vector<int> build_adjacency(const std::vector<ImageSegment>& segments,
                                 const ExtractConfig& cfg, const GridSpec& spec);

struct ExtractedPolyline {
  /// One confidence-weighted point per BFS level, root (topmost) first.
  std::vector<Vec2> raw_points;
  /// Densely evaluated smooth curve, ordered along the segment flow
  /// (deepest level toward the root).
  std::vector<Vec2> spline_points;
  int instance_id = 0;
  /// Input indices of the segments averaged at each BFS depth (diagnostic).
  std::vector<std::vector<int>> levels;
};

/// Downward filter, successor adjacency, per-root BFS over reversed links
/// with loop detection, level averaging, short-polyline rejection and the
/// smoothing-spline fit.
std::vector<ExtractedPolyline> extract(const std::vector<ImageSegment>& segments,
                                       const ExtractConfig& cfg,
                                       const GridSpec& spec);

}  // namespace gridline
