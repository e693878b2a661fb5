#include "gridline/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gridline/spline.hpp"

namespace gridline {

namespace {

void check_config(const ExtractConfig& cfg) {
  if (cfg.max_downward < 0.0 || cfg.max_downward > 1.0)
    throw std::invalid_argument("max_downward must be in [0,1]");
  if (!(cfg.successor_radius > 0.0))
    throw std::invalid_argument("successor_radius must be positive");
  if (cfg.min_segments < 1)
    throw std::invalid_argument("min_segments must be >= 1");
  if (cfg.spline_degree < 1)
    throw std::invalid_argument("spline_degree must be >= 1");
  if (cfg.spline_smoothing < 0.0)
    throw std::invalid_argument("spline_smoothing must be >= 0");
}

}  // namespace

std::vector<ImageSegment> filter_downward(const std::vector<ImageSegment>& segments,
                                          const ExtractConfig& cfg,
                                          const GridSpec& spec) {
  check_config(cfg);
  std::vector<ImageSegment> out;
  out.reserve(segments.size());
  const double limit = cfg.max_downward * spec.cell_px();
  for (const ImageSegment& s : segments)
    if (!(s.end.y - s.start.y > limit)) out.push_back(s);
  return out;
}

std::vector<int> build_adjacency(const std::vector<ImageSegment>& segments,
                                 const ExtractConfig& cfg, const GridSpec& spec) {
  check_config(cfg);
  const int n = static_cast<int>(segments.size());
  const double radius = cfg.successor_radius * spec.cell_px();
  const double bottom_half = (spec.rows() - 0.5) * spec.cell_px();
  std::vector<int> succ(n, -1);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      if (cfg.restrict_bottom_candidates && segments[j].start.y >= bottom_half)
        continue;
      const double d = distance(segments[i].end, segments[j].start);
      if (d < radius && d < best) {
        best = d;
        succ[i] = j;
      }
    }
  }
  return succ;
}

namespace {

Vec2 midpoint(const ImageSegment& s) { return 0.5 * (s.start + s.end); }

}  // namespace

std::vector<ExtractedPolyline> extract(const std::vector<ImageSegment>& segments,
                                       const ExtractConfig& cfg,
                                       const GridSpec& spec) {
  check_config(cfg);
  // Filtered working set plus a map back to the caller's indices for the
  // level report.
  std::vector<ImageSegment> kept;
  std::vector<int> input_index;
  {
    const double limit = cfg.max_downward * spec.cell_px();
    for (size_t i = 0; i < segments.size(); ++i) {
      if (segments[i].end.y - segments[i].start.y > limit) continue;
      kept.push_back(segments[i]);
      input_index.push_back(static_cast<int>(i));
    }
  }
  const int n = static_cast<int>(kept.size());
  const std::vector<int> succ = build_adjacency(kept, cfg, spec);

  std::vector<std::vector<int>> preds(n);
  for (int i = 0; i < n; ++i)
    if (succ[i] >= 0) preds[succ[i]].push_back(i);

  std::vector<bool> visited(n, false);
  std::vector<ExtractedPolyline> out;

  auto run_bfs = [&](int root) {
    std::vector<std::vector<int>> levels;
    std::vector<int> frontier{root};
    visited[root] = true;
    while (!frontier.empty()) {
      levels.push_back(frontier);
      std::vector<int> next;
      for (int node : frontier) {
        for (int p : preds[node]) {
          if (visited[p]) continue;
          visited[p] = true;
          next.push_back(p);
        }
      }
      std::sort(next.begin(), next.end());
      frontier = std::move(next);
    }
    if (static_cast<int>(levels.size()) < cfg.min_segments) return;

    ExtractedPolyline poly;
    poly.instance_id = static_cast<int>(out.size());
    for (const std::vector<int>& level : levels) {
      Vec2 acc{};
      double wsum = 0.0;
      std::vector<int> reported;
      for (int i : level) {
        const double w = std::max(kept[i].confidence, 1e-12);
        acc = acc + w * midpoint(kept[i]);
        wsum += w;
        reported.push_back(input_index[i]);
      }
      poly.raw_points.push_back(acc / wsum);
      poly.levels.push_back(std::move(reported));
    }

    // raw_points follow BFS depth (root first, i.e. against the segment
    // flow); the emitted curve runs in flow order instead.
    std::vector<Vec2> flow(poly.raw_points.rbegin(), poly.raw_points.rend());
    const BSpline2D spline =
        fit_smoothing_spline(flow, cfg.spline_degree, cfg.spline_smoothing);
    double chord = 0.0;
    for (size_t i = 1; i < flow.size(); ++i)
      chord += distance(flow[i - 1], flow[i]);
    const int lo = 2 * static_cast<int>(poly.raw_points.size());
    const int count = std::clamp(static_cast<int>(std::ceil(chord)) + 1, lo,
                                 std::max(4096, lo));
    poly.spline_points = eval_uniform(spline, count);
    out.push_back(std::move(poly));
  };

  // Natural roots first.
  for (int i = 0; i < n; ++i)
    if (succ[i] < 0 && !visited[i]) run_bfs(i);

  // Components left over are pure cycles; break each at its lowest segment.
  while (true) {
    int root = -1;
    double max_y = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (visited[i]) continue;
      const double y = midpoint(kept[i]).y;
      if (y > max_y) {
        max_y = y;
        root = i;
      }
    }
    if (root < 0) break;
    run_bfs(root);
  }
  return out;
}

}  // namespace gridline
