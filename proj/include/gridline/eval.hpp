#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gridline/geometry.hpp"
#include "gridline/polyline.hpp"

namespace gridline {

struct EvalConfig {
  double sample_px = 1.0;
  double tau_xy = 16.0;      // px
  double tau_alpha = 0.15;   // rad
  bool directed = true;      // orientations in [0,2pi) instead of [0,pi)
  bool per_class = false;    // restrict matching within classes
};

/// 1 px evaluation sample: position plus local orientation.
struct SamplePoint {
  double x = 0.0;
  double y = 0.0;
  double alpha = 0.0;
  std::optional<int> class_id;
};

/// Samples segments at sample_px arc spacing, endpoints included. Segments
/// that abut end-to-start (within 1e-6 px) are chained and sampled as one
/// path so shared junctions are not double-counted.
std::vector<SamplePoint> sample_segments(const std::vector<ImageSegment>& segments,
                                         const EvalConfig& cfg);

std::vector<SamplePoint> sample_polylines(const std::vector<Polyline>& polylines,
                                          const EvalConfig& cfg);

struct MatchCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

/// One-to-one greedy matching: repeatedly claims the closest eligible
/// (ground truth, prediction) pair where both coordinate offsets are within
/// tau_xy and the circular orientation difference within tau_alpha.
MatchCounts match_points(const std::vector<SamplePoint>& gt,
                         const std::vector<SamplePoint>& pred,
                         const EvalConfig& cfg);

struct EvalResult {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<int, MatchCounts> per_class;
};

EvalResult scores_from_counts(const MatchCounts& counts);

EvalResult evaluate(const std::vector<Polyline>& gt,
                    const std::vector<ImageSegment>& pred,
                    const EvalConfig& cfg);

/// Same metric with polyline predictions (e.g. extracted lanes).
EvalResult evaluate_polylines(const std::vector<Polyline>& gt,
                              const std::vector<Polyline>& pred,
                              const EvalConfig& cfg);

}  // namespace gridline
