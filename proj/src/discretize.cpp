#include "gridline/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gridline {

namespace {

constexpr double kSnapTol = 1e-7;   // px, for recognizing grid-line hits
constexpr double kDupTol = 1e-9;    // px, for collapsing duplicate vertices

bool on_grid_line(double coord, double cell) {
  const double k = std::round(coord / cell);
  return std::abs(coord - k * cell) <= kSnapTol;
}

double snap_to_grid(double coord, double cell) {
  const double k = std::round(coord / cell);
  const double g = k * cell;
  return std::abs(coord - g) <= kSnapTol ? g : coord;
}

bool on_border(Vec2 p, double cell) {
  return on_grid_line(p.x, cell) || on_grid_line(p.y, cell);
}

void append_vertex(std::vector<Vec2>& pts, Vec2 p) {
  if (pts.empty() || distance(pts.back(), p) > kDupTol) pts.push_back(p);
}

// Extends the ray p0 + t*(p0 - anchor) to the border of the cell box that
// contains p0 and returns the hit, snapped onto the border exactly.
Vec2 extend_to_cell_border(Vec2 p0, Vec2 anchor, const GridSpec& spec) {
  const double cell = spec.cell_px();
  const int col = std::clamp(static_cast<int>(std::floor(p0.x / cell)), 0,
                             spec.cols() - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p0.y / cell)), 0,
                             spec.rows() - 1);
  const double x0 = col * cell, x1 = (col + 1) * cell;
  const double y0 = row * cell, y1 = (row + 1) * cell;
  Vec2 dir = p0 - anchor;
  const double n = norm(dir);
  if (n == 0.0) return p0;
  dir = dir / n;
  double tx = std::numeric_limits<double>::infinity();
  double ty = std::numeric_limits<double>::infinity();
  if (dir.x > 0.0) tx = (x1 - p0.x) / dir.x;
  else if (dir.x < 0.0) tx = (x0 - p0.x) / dir.x;
  if (dir.y > 0.0) ty = (y1 - p0.y) / dir.y;
  else if (dir.y < 0.0) ty = (y0 - p0.y) / dir.y;
  const double t = std::min(tx, ty);
  Vec2 hit{p0.x + t * dir.x, p0.y + t * dir.y};
  if (tx <= ty) hit.x = dir.x > 0.0 ? x1 : x0;
  if (ty <= tx) hit.y = dir.y > 0.0 ? y1 : y0;
  hit.x = snap_to_grid(hit.x, cell);
  hit.y = snap_to_grid(hit.y, cell);
  return hit;
}

// Point-to-segment distance.
double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

// Uniform bucket index over image chords for nearest-distance queries.
class ChordIndex {
 public:
  ChordIndex(const std::vector<std::pair<Vec2, Vec2>>& chords, double bucket)
      : chords_(chords), bucket_(bucket) {
    for (size_t i = 0; i < chords.size(); ++i) {
      const auto& [a, b] = chords[i];
      const long ix0 = key(std::min(a.x, b.x)), ix1 = key(std::max(a.x, b.x));
      const long iy0 = key(std::min(a.y, b.y)), iy1 = key(std::max(a.y, b.y));
      for (long ix = ix0; ix <= ix1; ++ix)
        for (long iy = iy0; iy <= iy1; ++iy)
          buckets_[{ix, iy}].push_back(static_cast<int>(i));
      min_x_ = std::min(min_x_, ix0);
      max_x_ = std::max(max_x_, ix1);
      min_y_ = std::min(min_y_, iy0);
      max_y_ = std::max(max_y_, iy1);
    }
  }

  double nearest(Vec2 p) const {
    if (chords_.empty()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    const long px = key(p.x), py = key(p.y);
    const long last_ring = std::max(
        {px - min_x_, max_x_ - px, py - min_y_, max_y_ - py, long{0}});
    for (long ring = 0; ring <= last_ring; ++ring) {
      // Once a hit exists, stop as soon as the ring cannot improve on it.
      if (best < std::numeric_limits<double>::infinity() &&
          (static_cast<double>(ring) - 1.0) * bucket_ > best)
        break;
      for (long ix = px - ring; ix <= px + ring; ++ix) {
        for (long iy = py - ring; iy <= py + ring; ++iy) {
          if (std::max(std::abs(ix - px), std::abs(iy - py)) != ring) continue;
          auto it = buckets_.find({ix, iy});
          if (it == buckets_.end()) continue;
          for (int ci : it->second) {
            const auto& [a, b] = chords_[ci];
            best = std::min(best, segment_distance(p, a, b));
          }
        }
      }
    }
    return best;
  }

 private:
  long key(double v) const { return static_cast<long>(std::floor(v / bucket_)); }

  const std::vector<std::pair<Vec2, Vec2>>& chords_;
  double bucket_;
  std::map<std::pair<long, long>, std::vector<int>> buckets_;
  long min_x_ = std::numeric_limits<long>::max();
  long max_x_ = std::numeric_limits<long>::min();
  long min_y_ = std::numeric_limits<long>::max();
  long max_y_ = std::numeric_limits<long>::min();
};

std::vector<Vec2> sample_at_unit_spacing(const Polyline& p) {
  double total = 0.0;
  for (size_t i = 1; i < p.points.size(); ++i)
    total += distance(p.points[i - 1], p.points[i]);
  const int n = std::max(1, static_cast<int>(std::ceil(total)));
  std::vector<Vec2> out;
  out.reserve(n + 1);
  size_t seg = 1;
  double seg_start = 0.0;
  double seg_len = distance(p.points[0], p.points[1]);
  for (int i = 0; i <= n; ++i) {
    const double s = total * i / n;
    while (seg + 1 < p.points.size() && s > seg_start + seg_len) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(p.points[seg - 1], p.points[seg]);
    }
    const double t = seg_len > 0.0 ? (s - seg_start) / seg_len : 0.0;
    out.push_back(p.points[seg - 1] +
                  std::clamp(t, 0.0, 1.0) * (p.points[seg] - p.points[seg - 1]));
  }
  return out;
}

}  // namespace

void validate_polyline(const Polyline& p) {
  if (p.points.size() < 2)
    throw std::invalid_argument("polyline needs at least 2 points");
  for (size_t i = 1; i < p.points.size(); ++i)
    if (distance(p.points[i - 1], p.points[i]) <= kDupTol)
      throw std::invalid_argument("polyline has consecutive duplicate points");
}

double polyline_length(const Polyline& p) {
  double total = 0.0;
  for (size_t i = 1; i < p.points.size(); ++i)
    total += distance(p.points[i - 1], p.points[i]);
  return total;
}

Polyline slice(const Polyline& p, const GridSpec& spec) {
  validate_polyline(p);
  const double cell = spec.cell_px();
  const double w = spec.image_width(), h = spec.image_height();
  for (const Vec2& v : p.points)
    if (v.x < -kSnapTol || v.x > w + kSnapTol || v.y < -kSnapTol ||
        v.y > h + kSnapTol)
      throw std::invalid_argument("polyline outside image bounds");

  Polyline out;
  out.class_id = p.class_id;
  append_vertex(out.points, p.points.front());
  for (size_t i = 1; i < p.points.size(); ++i) {
    const Vec2 a = p.points[i - 1];
    const Vec2 b = p.points[i];
    std::vector<std::pair<double, Vec2>> crossings;
    auto collect = [&](double a_c, double b_c, bool x_axis) {
      if (a_c == b_c) return;
      const double lo = std::min(a_c, b_c), hi = std::max(a_c, b_c);
      for (long k = static_cast<long>(std::floor(lo / cell)) + 1;
           k * cell < hi; ++k) {
        const double g = k * cell;
        const double t = (g - a_c) / (b_c - a_c);
        if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
        Vec2 pt = x_axis ? Vec2{g, a.y + t * (b.y - a.y)}
                         : Vec2{a.x + t * (b.x - a.x), g};
        // Snap the interpolated coordinate too, so corner hits are exact.
        if (x_axis) pt.y = snap_to_grid(pt.y, cell);
        else pt.x = snap_to_grid(pt.x, cell);
        crossings.emplace_back(t, pt);
      }
    };
    collect(a.x, b.x, true);
    collect(a.y, b.y, false);
    std::sort(crossings.begin(), crossings.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [t, pt] : crossings) append_vertex(out.points, pt);
    append_vertex(out.points, b);
  }
  return out;
}

Polyline merge(const Polyline& p, const GridSpec& spec) {
  const double cell = spec.cell_px();
  Polyline out;
  out.class_id = p.class_id;
  for (size_t i = 0; i < p.points.size(); ++i) {
    const bool terminal = i == 0 || i + 1 == p.points.size();
    if (terminal || on_border(p.points[i], cell))
      append_vertex(out.points, p.points[i]);
  }
  return out;
}

Polyline resolve_ends(const Polyline& p, const GridSpec& spec) {
  const double cell = spec.cell_px();
  const double half = cell / 2.0;
  Polyline out = p;

  auto resolve_front = [&]() {
    if (out.points.size() < 2) return;
    Vec2& p0 = out.points.front();
    if (on_border(p0, cell)) return;
    const Vec2 next = out.points[1];
    if (distance(p0, next) > half) {
      p0 = extend_to_cell_border(p0, next, spec);
    } else {
      out.points.erase(out.points.begin());
    }
  };
  auto resolve_back = [&]() {
    if (out.points.size() < 2) return;
    Vec2& pn = out.points.back();
    if (on_border(pn, cell)) return;
    const Vec2 prev = out.points[out.points.size() - 2];
    if (distance(pn, prev) > half) {
      pn = extend_to_cell_border(pn, prev, spec);
    } else {
      out.points.pop_back();
    }
  };
  resolve_front();
  resolve_back();
  if (out.points.size() < 2) out.points.clear();
  return out;
}

std::vector<CellGroundTruth> discretize(const std::vector<Polyline>& polylines,
                                        const GridSpec& spec,
                                        Representation representation) {
  const double cell = spec.cell_px();
  std::map<std::pair<int, int>, CellGroundTruth> cells;

  for (const Polyline& src : polylines) {
    Polyline work = merge(slice(src, spec), spec);
    if (representation != Representation::kCartesian)
      work = resolve_ends(work, spec);
    if (work.points.size() < 2) continue;

    for (size_t i = 1; i < work.points.size(); ++i) {
      const Vec2 a = work.points[i - 1];
      const Vec2 b = work.points[i];
      if (distance(a, b) <= kDupTol) continue;  // corner-touch chords
      const Vec2 mid = 0.5 * (a + b);
      const int col = std::clamp(static_cast<int>(std::floor(mid.x / cell)), 0,
                                 spec.cols() - 1);
      const int row = std::clamp(static_cast<int>(std::floor(mid.y / cell)), 0,
                                 spec.rows() - 1);
      auto normalize = [&](Vec2 v) {
        Vec2 q{(v.x - col * cell) / cell, (v.y - row * cell) / cell};
        // Chord endpoints sit inside the closed cell up to snapping noise.
        q.x = std::clamp(q.x, 0.0, 1.0);
        q.y = std::clamp(q.y, 0.0, 1.0);
        return q;
      };
      const CartesianPoints local{normalize(a), normalize(b)};
      SegmentGeometry geom;
      switch (representation) {
        case Representation::kCartesian: geom = local; break;
        case Representation::kBorder1D: geom = to_border1d(SegmentGeometry{local}); break;
        case Representation::kEuler: geom = to_euler(SegmentGeometry{local}); break;
      }
      auto& entry = cells[{row, col}];
      entry.cell_row = row;
      entry.cell_col = col;
      entry.segments.emplace_back(std::move(geom), src.class_id);
    }
  }

  std::vector<CellGroundTruth> out;
  out.reserve(cells.size());
  for (auto& [key, value] : cells) out.push_back(std::move(value));
  return out;
}

std::vector<Polyline> chords_as_polylines(
    const std::vector<CellGroundTruth>& cells, const GridSpec& spec) {
  std::vector<Polyline> out;
  for (const auto& cell : cells) {
    for (const auto& [geom, class_id] : cell.segments) {
      const ImageSegment seg =
          to_image(geom, cell.cell_row, cell.cell_col, spec, 1.0, class_id);
      out.push_back(Polyline{{seg.start, seg.end}, class_id});
    }
  }
  return out;
}

DeviationReport deviation(const std::vector<Polyline>& original,
                          const std::vector<CellGroundTruth>& discretized,
                          const GridSpec& spec) {
  std::vector<std::pair<Vec2, Vec2>> chords;
  for (const auto& cell : discretized) {
    for (const auto& [geom, class_id] : cell.segments) {
      const ImageSegment seg =
          to_image(geom, cell.cell_row, cell.cell_col, spec, 1.0, class_id);
      chords.emplace_back(seg.start, seg.end);
    }
  }
  const ChordIndex index(chords, spec.cell_px());

  DeviationReport report;
  double total = 0.0;
  long count = 0;
  for (size_t pi = 0; pi < original.size(); ++pi) {
    const std::vector<Vec2> samples = sample_at_unit_spacing(original[pi]);
    double acc = 0.0;
    for (const Vec2& s : samples) acc += index.nearest(s);
    report.per_polyline.emplace_back(static_cast<int>(pi),
                                     samples.empty() ? 0.0 : acc / samples.size());
    total += acc;
    count += static_cast<long>(samples.size());
  }
  report.mean_abs_deviation = count > 0 ? total / count : 0.0;
  return report;
}

}  // namespace gridline
