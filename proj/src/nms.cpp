#include "gridline/nms.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace gridline {

NmsConfig nms_preset(std::string_view name) {
  NmsConfig cfg;
  cfg.direction_mode = DirectionMode::kUnitNormalized;
  if (name == "tusimple") {
    cfg.tau_c = 0.9;
    cfg.lambda_l = 0.013;
    cfg.lambda_m = 2.0;
    cfg.lambda_d = 0.05;
  } else if (name == "kai") {
    cfg.tau_c = 0.95;
    cfg.lambda_l = 0.013;
    cfg.lambda_m = 1.5;
    cfg.lambda_d = 0.05;
  } else if (name == "argoverse") {
    cfg.tau_c = 0.99;
    cfg.lambda_l = 0.016;
    cfg.lambda_m = 1.5;
    cfg.lambda_d = 0.05;
  } else {
    throw std::invalid_argument("unknown preset: " + std::string(name));
  }
  return cfg;
}

namespace {

void check_config(const NmsConfig& cfg) {
  if (!(cfg.lambda_l > 0.0 && cfg.lambda_m > 0.0 && cfg.lambda_d > 0.0))
    throw std::invalid_argument("nms scale weights must be positive");
  if (!(cfg.epsilon > 0.0))
    throw std::invalid_argument("epsilon must be positive");
  if (!(cfg.min_weight >= 1.0))
    throw std::invalid_argument("min_weight must be >= 1");
  if (cfg.tau_c < 0.0 || cfg.tau_c > 1.0)
    throw std::invalid_argument("tau_c must be in [0,1]");
  if (!(cfg.weight_exponent > 0.0))
    throw std::invalid_argument("weight_exponent must be positive");
}

}  // namespace

NmsCoordinate to_nms_coords(const ImageSegment& seg, const NmsConfig& cfg,
                            double kappa) {
  check_config(cfg);
  const Vec2 delta = seg.end - seg.start;
  const double raw_len = norm(delta);
  if (raw_len <= 0.0) throw std::invalid_argument("zero-length segment");
  NmsCoordinate c;
  const Vec2 mid = 0.5 * (seg.start + seg.end);
  c.mx = cfg.lambda_m * kappa * mid.x;
  c.my = cfg.lambda_m * kappa * mid.y;
  c.len = cfg.lambda_l * raw_len;
  const double divisor =
      cfg.direction_mode == DirectionMode::kFormula ? c.len : raw_len;
  c.dx = cfg.lambda_d * delta.x / divisor;
  c.dy = cfg.lambda_d * delta.y / divisor;
  c.weight = std::pow(std::clamp(seg.confidence, 0.0, 1.0), cfg.weight_exponent);
  return c;
}

namespace {

double dist2(const NmsCoordinate& a, const NmsCoordinate& b) {
  const double d0 = a.mx - b.mx;
  const double d1 = a.my - b.my;
  const double d2 = a.len - b.len;
  const double d3 = a.dx - b.dx;
  const double d4 = a.dy - b.dy;
  return d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3 + d4 * d4;
}

// Buckets on the midpoint plane; a 5D ball of radius eps projects into a
// (2eps)^2 square there.
class NeighborIndex {
 public:
  NeighborIndex(const std::vector<NmsCoordinate>& pts, double eps)
      : pts_(pts), eps_(eps) {
    for (size_t i = 0; i < pts.size(); ++i)
      buckets_[key(pts[i])].push_back(static_cast<int>(i));
  }

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    const auto [kx, ky] = key(pts_[i]);
    const double e2 = eps_ * eps_;
    for (long ix = kx - 1; ix <= kx + 1; ++ix) {
      for (long iy = ky - 1; iy <= ky + 1; ++iy) {
        auto it = buckets_.find({ix, iy});
        if (it == buckets_.end()) continue;
        for (int j : it->second)
          if (dist2(pts_[i], pts_[j]) <= e2) out.push_back(j);
      }
    }
    return out;
  }

 private:
  std::pair<long, long> key(const NmsCoordinate& p) const {
    return {static_cast<long>(std::floor(p.mx / eps_)),
            static_cast<long>(std::floor(p.my / eps_))};
  }

  const std::vector<NmsCoordinate>& pts_;
  double eps_;
  std::map<std::pair<long, long>, std::vector<int>> buckets_;
};

}  // namespace

std::vector<int> dbscan(const std::vector<NmsCoordinate>& points,
                        const NmsConfig& cfg) {
  check_config(cfg);
  const int n = static_cast<int>(points.size());
  std::vector<int> labels(n, -1);
  if (n == 0) return labels;
  const NeighborIndex index(points, cfg.epsilon);

  std::vector<std::vector<int>> nbrs(n);
  std::vector<bool> core(n, false);
  for (int i = 0; i < n; ++i) {
    nbrs[i] = index.neighbors(i);
    double w = 0.0;
    for (int j : nbrs[i]) w += points[j].weight;
    core[i] = w >= cfg.min_weight;
  }

  int next_label = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i] || labels[i] >= 0) continue;
    const int label = next_label++;
    std::deque<int> queue{i};
    labels[i] = label;
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      for (int j : nbrs[cur]) {
        if (!core[j] || labels[j] >= 0) continue;
        labels[j] = label;
        queue.push_back(j);
      }
    }
  }

  // Border points join the nearest core within epsilon.
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    int best_core = -1;
    for (int j : nbrs[i]) {
      if (!core[j]) continue;
      const double d = dist2(points[i], points[j]);
      if (d < best || (d == best && j < best_core)) {
        best = d;
        best_core = j;
      }
    }
    labels[i] = best_core >= 0 ? labels[best_core] : -1;
  }
  return labels;
}

ClusterResult suppress(const std::vector<ImageSegment>& segments,
                       const NmsConfig& cfg, const GridSpec& spec) {
  check_config(cfg);
  ClusterResult result;
  const double kappa = spec.kappa();
  const double scale = std::max(spec.image_width(), spec.image_height());

  std::vector<NmsCoordinate> pts;
  pts.reserve(segments.size());
  for (size_t i = 0; i < segments.size(); ++i) {
    const ImageSegment& seg = segments[i];
    if (!(seg.confidence > cfg.tau_c)) continue;
    if (norm(seg.end - seg.start) <= 0.0) {
      ++result.dropped_degenerate;
      continue;
    }
    ImageSegment scaled = seg;
    scaled.start = seg.start / scale;
    scaled.end = seg.end / scale;
    NmsCoordinate c = to_nms_coords(scaled, cfg, kappa);
    c.source = static_cast<int>(i);
    pts.push_back(c);
  }
  if (pts.empty()) return result;

  const std::vector<int> labels = dbscan(pts, cfg);
  int n_clusters = 0;
  for (int l : labels) n_clusters = std::max(n_clusters, l + 1);

  std::vector<std::vector<int>> members(n_clusters);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) ++result.noise_count;
    else members[labels[i]].push_back(static_cast<int>(i));
  }

  for (const std::vector<int>& cluster : members) {
    double wsum = 0.0, mx = 0.0, my = 0.0, len = 0.0, dx = 0.0, dy = 0.0;
    double conf_max = 0.0, conf_wsum = 0.0;
    std::map<int, double> class_votes;
    for (int i : cluster) {
      const NmsCoordinate& c = pts[i];
      wsum += c.weight;
      mx += c.weight * c.mx;
      my += c.weight * c.my;
      len += c.weight * c.len;
      dx += c.weight * c.dx;
      dy += c.weight * c.dy;
      const ImageSegment& src = segments[c.source];
      conf_max = std::max(conf_max, src.confidence);
      conf_wsum += c.weight * src.confidence;
      if (src.class_id.has_value()) class_votes[*src.class_id] += c.weight;
    }
    mx /= wsum;
    my /= wsum;
    len /= wsum;
    dx /= wsum;
    dy /= wsum;

    const Vec2 mid{mx / (cfg.lambda_m * kappa), my / (cfg.lambda_m * kappa)};
    const double raw_len = len / cfg.lambda_l;
    const double dn = std::sqrt(dx * dx + dy * dy);
    if (dn == 0.0) continue;  // opposing directions cancelled out exactly
    const Vec2 dir{dx / dn, dy / dn};

    ImageSegment rep;
    rep.start = (mid - (raw_len / 2.0) * dir) * scale;
    rep.end = (mid + (raw_len / 2.0) * dir) * scale;
    // Direction averaging can push endpoints marginally past the frame.
    for (Vec2* p : {&rep.start, &rep.end}) {
      p->x = std::clamp(p->x, 0.0, static_cast<double>(spec.image_width()));
      p->y = std::clamp(p->y, 0.0, static_cast<double>(spec.image_height()));
    }
    rep.confidence = cfg.cluster_confidence == ClusterConfidence::kMax
                         ? conf_max
                         : conf_wsum / wsum;
    if (!class_votes.empty()) {
      int best_class = class_votes.begin()->first;
      double best_votes = class_votes.begin()->second;
      for (const auto& [cls, votes] : class_votes) {
        if (votes > best_votes) {
          best_votes = votes;
          best_class = cls;
        }
      }
      rep.class_id = best_class;
    }
    result.segments.push_back(rep);
    result.cluster_sizes.push_back(static_cast<int>(cluster.size()));
  }
  return result;
}

}  // namespace gridline
