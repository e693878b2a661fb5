#pragma once

#include <string_view>
#include <vector>

#include "gridline/geometry.hpp"

namespace gridline {

/// Direction encoding inside the 5-vector. kFormula divides the direction by
/// the already-scaled length (so its magnitude is lambda_d / lambda_l);
/// kUnitNormalized divides by the raw length, giving lambda_d times the unit
/// direction. The presets use the unit-normalized form, which is what keeps
/// direction noise inside the default epsilon.
enum class DirectionMode { kFormula, kUnitNormalized };

enum class ClusterConfidence { kMax, kWeightedMean };

struct NmsConfig {
  double tau_c = 0.9;
  double lambda_l = 0.013;
  double lambda_m = 2.0;
  double lambda_d = 0.05;
  double epsilon = 0.02;
  double min_weight = 2.0;
  double weight_exponent = 10.0;
  DirectionMode direction_mode = DirectionMode::kFormula;
  ClusterConfidence cluster_confidence = ClusterConfidence::kMax;
};

/// Named parameter sets: "tusimple", "kai", "argoverse".
NmsConfig nms_preset(std::string_view name);

/// 5-vector clustering coordinate plus its density weight.
struct NmsCoordinate {
  double mx = 0.0;
  double my = 0.0;
  double len = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double weight = 0.0;
  int source = -1;
};

/// Converts one segment into clustering coordinates. Throws on zero length;
/// callers drop and count degenerate segments instead.
NmsCoordinate to_nms_coords(const ImageSegment& seg, const NmsConfig& cfg,
                            double kappa);

/// Weighted DBSCAN over the 5-vectors. A point is core when the weights in
/// its epsilon ball (including itself) sum to at least min_weight. Core
/// points within epsilon of each other share a cluster; non-core points join
/// the cluster of the nearest core in reach or become noise (-1). Labels are
/// stable under input permutation up to renumbering.
std::vector<int> dbscan(const std::vector<NmsCoordinate>& points,
                        const NmsConfig& cfg);

struct ClusterResult {
  std::vector<ImageSegment> segments;
  std::vector<int> cluster_sizes;
  int noise_count = 0;
  int dropped_degenerate = 0;
};

/// Threshold, convert, cluster and average. Image coordinates are divided by
/// max(width, height) before the coordinate equations so the default epsilon
/// operates on a normalized scale; representatives are mapped back exactly.
ClusterResult suppress(const std::vector<ImageSegment>& segments,
                       const NmsConfig& cfg, const GridSpec& spec);

}  // namespace gridline
