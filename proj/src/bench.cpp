#include "gridline/bench.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <vector>

#include "gridline/discretize.hpp"
#include "gridline/oracle.hpp"

namespace gridline {

BenchReport bench_nms(const BenchConfig& cfg) {
  if (cfg.repetitions <= 0) throw std::invalid_argument("empty benchmark");

  const GridSpec spec(cfg.cols * cfg.cell_px, cfg.rows * cfg.cell_px,
                      cfg.cell_px);
  SceneConfig scene_cfg;
  scene_cfg.width = spec.image_width();
  scene_cfg.height = spec.image_height();
  scene_cfg.lanes = std::max(2, cfg.cols / 4);
  scene_cfg.seed = cfg.seed;
  const std::vector<Polyline> scene = synth_scene(scene_cfg);
  const std::vector<CellGroundTruth> gt =
      discretize(scene, spec, Representation::kCartesian);

  // Size duplicates so roughly above_tau_fraction of all slots carry a
  // confidence above the threshold; the rest become low-confidence noise.
  long gt_segments = 0;
  for (const auto& c : gt) gt_segments += static_cast<long>(c.segments.size());
  const long total_slots =
      static_cast<long>(spec.cell_count()) * cfg.predictors;
  const long wanted = static_cast<long>(cfg.above_tau_fraction * total_slots);
  OracleConfig ocfg;
  ocfg.jitter_sigma = 1.5;
  ocfg.duplicates_per_segment = std::max(
      1, static_cast<int>(wanted / std::max<long>(1, gt_segments)));
  ocfg.spurious_rate = 1.0;  // fill every remaining slot with noise
  ocfg.spurious_confidence = {0.05, cfg.nms.tau_c * 0.95};
  ocfg.matched_confidence = {std::min(1.0, cfg.nms.tau_c + 0.02), 1.0};
  ocfg.seed = cfg.seed + 1;
  const OracleResult oracle = synth_oracle(gt, spec, cfg.predictors, 0,
                                           Representation::kCartesian, ocfg);
  const std::vector<ImageSegment> segments = decode_grid(oracle.grid);

  BenchReport report;
  report.segments = static_cast<int>(segments.size());
  for (const ImageSegment& s : segments)
    if (s.confidence > cfg.nms.tau_c) ++report.above_threshold;
  report.repetitions = cfg.repetitions;

  std::vector<double> times_ms(cfg.repetitions);
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const ClusterResult r = suppress(segments, cfg.nms, spec);
    const auto t1 = std::chrono::steady_clock::now();
    times_ms[rep] =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    report.clusters_last = static_cast<int>(r.segments.size());
  }
  std::sort(times_ms.begin(), times_ms.end());
  report.median_ms = times_ms[times_ms.size() / 2];
  report.p95_ms = times_ms[std::min(times_ms.size() - 1,
                                    static_cast<size_t>(times_ms.size() * 0.95))];
  report.fps_median = report.median_ms > 0.0 ? 1000.0 / report.median_ms : 0.0;
  return report;
}

}  // namespace gridline
