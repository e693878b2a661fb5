#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gridline/discretize.hpp"
#include "gridline/loss.hpp"
#include "gridline/polyline.hpp"

namespace gridline {

/// Parameters of the synthetic predictor oracle that stands in for a trained
/// network: jittered duplicates of the discretized ground truth plus random
/// spurious segments, everything seeded.
struct OracleConfig {
  double jitter_sigma = 0.0;  // px
  int duplicates_per_segment = 1;
  double spurious_rate = 0.0;
  std::pair<double, double> spurious_confidence{0.05, 0.3};
  std::pair<double, double> matched_confidence{1.0, 1.0};
  uint64_t seed = 0;
};

struct OracleResult {
  PredictorGrid grid;
  int overflow_dropped = 0;  // gt duplicates that did not fit into P slots
};

OracleResult synth_oracle(const std::vector<CellGroundTruth>& gt,
                          const GridSpec& spec, int predictors_per_cell,
                          int class_count, Representation representation,
                          const OracleConfig& cfg);

/// Decodes every predictor into an image-space segment (class = argmax).
std::vector<ImageSegment> decode_grid(const PredictorGrid& grid);

/// Synthetic lane-like scene: smooth curves flowing from the bottom edge
/// toward a horizon line.
struct SceneConfig {
  int width = 640;
  int height = 320;
  int lanes = 5;
  int class_count = 0;
  uint64_t seed = 0;
};

std::vector<Polyline> synth_scene(const SceneConfig& cfg);

}  // namespace gridline
