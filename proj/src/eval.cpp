#include "gridline/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <numbers>
#include <unordered_map>

namespace gridline {

namespace {

constexpr double kChainTol = 1e-6;  // px, junction tolerance for chaining

void check_config(const EvalConfig& cfg) {
  if (!(cfg.sample_px > 0.0))
    throw std::invalid_argument("sample_px must be positive");
  if (!(cfg.tau_xy > 0.0)) throw std::invalid_argument("tau_xy must be positive");
  if (!(cfg.tau_alpha > 0.0))
    throw std::invalid_argument("tau_alpha must be positive");
}

double wrap_alpha(double raw, bool directed) {
  const double period = directed ? 2.0 * std::numbers::pi : std::numbers::pi;
  double a = std::fmod(raw, period);
  if (a < 0.0) a += period;
  return a;
}

double circular_diff(double a, double b, bool directed) {
  const double period = directed ? 2.0 * std::numbers::pi : std::numbers::pi;
  double d = std::abs(a - b);
  d = std::fmod(d, period);
  return std::min(d, period - d);
}

void sample_path(const std::vector<Vec2>& pts, std::optional<int> class_id,
                 const EvalConfig& cfg, std::vector<SamplePoint>& out) {
  if (pts.empty()) return;
  double total = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) total += distance(pts[i - 1], pts[i]);
  if (total <= 0.0) {  // degenerate: single sample
    out.push_back({pts.front().x, pts.front().y, 0.0, class_id});
    return;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(total / cfg.sample_px)));
  size_t seg = 1;
  double seg_start = 0.0;
  double seg_len = distance(pts[0], pts[1]);
  for (int i = 0; i <= n; ++i) {
    const double s = total * i / n;
    while (seg + 1 < pts.size() && s > seg_start + seg_len) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(pts[seg - 1], pts[seg]);
    }
    const double t = seg_len > 0.0 ? std::clamp((s - seg_start) / seg_len, 0.0, 1.0) : 0.0;
    const Vec2 p = pts[seg - 1] + t * (pts[seg] - pts[seg - 1]);
    const Vec2 d = pts[seg] - pts[seg - 1];
    const double alpha = wrap_alpha(std::atan2(d.y, d.x), cfg.directed);
    out.push_back({p.x, p.y, alpha, class_id});
  }
}

struct QuantizedPoint {
  long x;
  long y;
  bool operator==(const QuantizedPoint&) const = default;
};

struct QuantizedPointHash {
  size_t operator()(const QuantizedPoint& p) const {
    return std::hash<long>()(p.x) * 1000003u ^ std::hash<long>()(p.y);
  }
};

QuantizedPoint quantize(Vec2 p) {
  return {static_cast<long>(std::llround(p.x / kChainTol)),
          static_cast<long>(std::llround(p.y / kChainTol))};
}

}  // namespace

std::vector<SamplePoint> sample_segments(const std::vector<ImageSegment>& segments,
                                         const EvalConfig& cfg) {
  check_config(cfg);
  const int n = static_cast<int>(segments.size());
  // Chain strictly end-to-start abutting segments of the same class.
  std::unordered_map<QuantizedPoint, std::vector<int>, QuantizedPointHash> by_start;
  for (int i = 0; i < n; ++i) by_start[quantize(segments[i].start)].push_back(i);

  std::vector<int> next(n, -1);
  std::vector<bool> has_pred(n, false);
  for (int i = 0; i < n; ++i) {
    auto it = by_start.find(quantize(segments[i].end));
    if (it == by_start.end()) continue;
    for (int j : it->second) {
      if (j == i || has_pred[j]) continue;
      if (segments[j].class_id != segments[i].class_id) continue;
      if (distance(segments[i].end, segments[j].start) > kChainTol) continue;
      next[i] = j;
      has_pred[j] = true;
      break;
    }
  }

  std::vector<SamplePoint> out;
  std::vector<bool> emitted(n, false);
  auto emit_chain = [&](int head) {
    std::vector<Vec2> path{segments[head].start};
    std::optional<int> class_id = segments[head].class_id;
    for (int cur = head; cur >= 0; cur = next[cur]) {
      if (emitted[cur]) break;  // cycle guard
      emitted[cur] = true;
      path.push_back(segments[cur].end);
    }
    sample_path(path, class_id, cfg, out);
  };
  for (int i = 0; i < n; ++i)
    if (!has_pred[i] && !emitted[i]) emit_chain(i);
  for (int i = 0; i < n; ++i)  // leftovers are cyclic chains
    if (!emitted[i]) emit_chain(i);
  return out;
}

std::vector<SamplePoint> sample_polylines(const std::vector<Polyline>& polylines,
                                          const EvalConfig& cfg) {
  check_config(cfg);
  std::vector<SamplePoint> out;
  for (const Polyline& p : polylines) sample_path(p.points, p.class_id, cfg, out);
  return out;
}

namespace {

MatchCounts match_points_single(const std::vector<const SamplePoint*>& gt,
                                const std::vector<const SamplePoint*>& pred,
                                const EvalConfig& cfg) {
  // Bucket predictions on a tau_xy grid; eligibility is a box in (x,y) plus
  // the circular alpha radius.
  std::unordered_map<QuantizedPoint, std::vector<int>, QuantizedPointHash> buckets;
  auto key = [&](double x, double y) {
    return QuantizedPoint{static_cast<long>(std::floor(x / cfg.tau_xy)),
                          static_cast<long>(std::floor(y / cfg.tau_xy))};
  };
  for (size_t j = 0; j < pred.size(); ++j)
    buckets[key(pred[j]->x, pred[j]->y)].push_back(static_cast<int>(j));

  struct Pair {
    double d;
    int gi;
    int pj;
  };
  std::vector<Pair> pairs;
  for (size_t i = 0; i < gt.size(); ++i) {
    const QuantizedPoint c = key(gt[i]->x, gt[i]->y);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        auto it = buckets.find({c.x + dx, c.y + dy});
        if (it == buckets.end()) continue;
        for (int j : it->second) {
          const double ox = std::abs(gt[i]->x - pred[j]->x);
          const double oy = std::abs(gt[i]->y - pred[j]->y);
          if (ox > cfg.tau_xy || oy > cfg.tau_xy) continue;
          if (circular_diff(gt[i]->alpha, pred[j]->alpha, cfg.directed) >
              cfg.tau_alpha)
            continue;
          pairs.push_back({std::sqrt(ox * ox + oy * oy), static_cast<int>(i), j});
        }
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.gi != b.gi) return a.gi < b.gi;
    return a.pj < b.pj;
  });

  std::vector<bool> gt_used(gt.size(), false), pred_used(pred.size(), false);
  MatchCounts counts;
  for (const Pair& p : pairs) {
    if (gt_used[p.gi] || pred_used[p.pj]) continue;
    gt_used[p.gi] = true;
    pred_used[p.pj] = true;
    ++counts.tp;
  }
  counts.fn = static_cast<long>(gt.size()) - counts.tp;
  counts.fp = static_cast<long>(pred.size()) - counts.tp;
  return counts;
}

}  // namespace

MatchCounts match_points(const std::vector<SamplePoint>& gt,
                         const std::vector<SamplePoint>& pred,
                         const EvalConfig& cfg) {
  check_config(cfg);
  if (!cfg.per_class) {
    std::vector<const SamplePoint*> g, p;
    g.reserve(gt.size());
    p.reserve(pred.size());
    for (const auto& s : gt) g.push_back(&s);
    for (const auto& s : pred) p.push_back(&s);
    return match_points_single(g, p, cfg);
  }
  std::map<int, std::pair<std::vector<const SamplePoint*>,
                          std::vector<const SamplePoint*>>> groups;
  for (const auto& s : gt) groups[s.class_id.value_or(-1)].first.push_back(&s);
  for (const auto& s : pred) groups[s.class_id.value_or(-1)].second.push_back(&s);
  MatchCounts total;
  for (const auto& [cls, pair] : groups) {
    const MatchCounts c = match_points_single(pair.first, pair.second, cfg);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

EvalResult scores_from_counts(const MatchCounts& counts) {
  EvalResult r;
  r.tp = counts.tp;
  r.fp = counts.fp;
  r.fn = counts.fn;
  if (counts.tp + counts.fp > 0)
    r.precision = static_cast<double>(counts.tp) / (counts.tp + counts.fp);
  else
    r.precision = counts.fn == 0 ? 1.0 : 0.0;
  if (counts.tp + counts.fn > 0)
    r.recall = static_cast<double>(counts.tp) / (counts.tp + counts.fn);
  else
    r.recall = counts.fp == 0 ? 1.0 : 0.0;
  const double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

namespace {

EvalResult evaluate_samples(const std::vector<SamplePoint>& gt_samples,
                            const std::vector<SamplePoint>& pred_samples,
                            const EvalConfig& cfg) {
  EvalResult r = scores_from_counts(match_points(gt_samples, pred_samples, cfg));
  if (cfg.per_class) {
    std::map<int, std::pair<std::vector<SamplePoint>, std::vector<SamplePoint>>> split;
    for (const auto& s : gt_samples) split[s.class_id.value_or(-1)].first.push_back(s);
    for (const auto& s : pred_samples) split[s.class_id.value_or(-1)].second.push_back(s);
    for (const auto& [cls, pair] : split)
      r.per_class[cls] = match_points(pair.first, pair.second, cfg);
  }
  return r;
}

}  // namespace

EvalResult evaluate(const std::vector<Polyline>& gt,
                    const std::vector<ImageSegment>& pred,
                    const EvalConfig& cfg) {
  return evaluate_samples(sample_polylines(gt, cfg), sample_segments(pred, cfg),
                          cfg);
}

EvalResult evaluate_polylines(const std::vector<Polyline>& gt,
                              const std::vector<Polyline>& pred,
                              const EvalConfig& cfg) {
  return evaluate_samples(sample_polylines(gt, cfg), sample_polylines(pred, cfg),
                          cfg);
}

}  // namespace gridline
