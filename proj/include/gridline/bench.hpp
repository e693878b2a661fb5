#pragma once

#include <cstdint>

#include "gridline/nms.hpp"

namespace gridline {

struct BenchConfig {
  int rows = 10;
  int cols = 20;
  int cell_px = 32;
  int predictors = 8;
  int repetitions = 50;
  uint64_t seed = 0;
  double above_tau_fraction = 0.25;  // share of segments above the threshold
  NmsConfig nms = nms_preset("tusimple");
};

struct BenchReport {
  int segments = 0;
  int above_threshold = 0;
  int repetitions = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double fps_median = 0.0;
  int clusters_last = 0;
};

/// Builds a seeded synthetic predictor grid, then times suppress (threshold,
/// conversion, clustering, averaging) end to end per repetition.
BenchReport bench_nms(const BenchConfig& cfg);

}  // namespace gridline
