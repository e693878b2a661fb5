#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gridline/geometry.hpp"
#include "gridline/polyline.hpp"

namespace gridline {

/// Ground-truth segments assigned to one grid cell, in traversal order along
/// the source polylines.
struct CellGroundTruth {
  int cell_row = 0;
  int cell_col = 0;
  std::vector<std::pair<SegmentGeometry, std::optional<int>>> segments;
};

/// Inserts every grid-line crossing of the polyline as a vertex. Original
/// vertices and their order are preserved. Throws if the polyline leaves the
/// image frame.
Polyline slice(const Polyline& p, const GridSpec& spec);

/// Removes vertices strictly interior to a cell, keeping the first and last
/// vertex, so each cell retains only its crossing-to-crossing chord.
Polyline merge(const Polyline& p, const GridSpec& spec);

/// Extrapolates a terminal chord longer than half the cell size to the cell
/// border and deletes shorter ones. May return fewer than 2 points when the
/// whole polyline is dropped.
Polyline resolve_ends(const Polyline& p, const GridSpec& spec);

/// Full slice/merge/resolve pipeline. Border-bound representations resolve
/// terminal chords; the Cartesian representation keeps them unbound.
std::vector<CellGroundTruth> discretize(const std::vector<Polyline>& polylines,
                                        const GridSpec& spec,
                                        Representation representation);

struct DeviationReport {
  double mean_abs_deviation = 0.0;
  std::vector<std::pair<int, double>> per_polyline;
};

/// Samples the original polylines at 1 px arc spacing and reports the mean
/// distance to the discretized geometry.
DeviationReport deviation(const std::vector<Polyline>& original,
                          const std::vector<CellGroundTruth>& discretized,
                          const GridSpec& spec);

/// Rebuilds every discretized chord as a two-point polyline in image pixels.
std::vector<Polyline> chords_as_polylines(
    const std::vector<CellGroundTruth>& cells, const GridSpec& spec);

}  // namespace gridline
