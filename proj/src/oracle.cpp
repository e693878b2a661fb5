#include "gridline/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include "gridline/rng.hpp"

namespace gridline {

namespace {

double wrap01(double t) {
  t = std::fmod(t, 1.0);
  return t < 0.0 ? t + 1.0 : t;
}

// Jitter in the representation's own parameter space so the result stays a
// valid segment of that representation.
SegmentGeometry jitter_geometry(const SegmentGeometry& g, double sigma_px,
                                double cell_px, Rng& rng) {
  const double border_sigma = sigma_px / (4.0 * cell_px);
  if (const auto* c = std::get_if<CartesianPoints>(&g)) {
    const double s = sigma_px / cell_px;
    auto j = [&](Vec2 p) {
      return Vec2{std::clamp(p.x + rng.normal(0.0, s), 0.0, 1.0),
                  std::clamp(p.y + rng.normal(0.0, s), 0.0, 1.0)};
    };
    return CartesianPoints{j(c->start), j(c->end)};
  }
  if (const auto* b = std::get_if<BorderPoints1D>(&g)) {
    return BorderPoints1D{wrap01(b->start + rng.normal(0.0, border_sigma)),
                          wrap01(b->end + rng.normal(0.0, border_sigma))};
  }
  const BorderPoints1D b = to_border1d(g);
  const double ts = wrap01(b.start + rng.normal(0.0, border_sigma));
  const double te = wrap01(b.end + rng.normal(0.0, border_sigma));
  return to_euler(SegmentGeometry{BorderPoints1D{ts, te}});
}

SegmentGeometry random_geometry(Representation rep, Rng& rng) {
  switch (rep) {
    case Representation::kCartesian:
      return CartesianPoints{{rng.uniform(), rng.uniform()},
                             {rng.uniform(), rng.uniform()}};
    case Representation::kBorder1D:
      return BorderPoints1D{rng.uniform(), rng.uniform()};
    case Representation::kEuler:
      return EulerAngles::from_angles(rng.uniform(0.0, 2.0 * std::numbers::pi),
                                      rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  throw std::invalid_argument("unknown representation");
}

std::vector<double> one_hot_probs(std::optional<int> class_id, int class_count) {
  std::vector<double> v(class_count, 0.0);
  if (class_count > 0 && class_id.has_value() && *class_id >= 0 &&
      *class_id < class_count)
    v[*class_id] = 1.0;
  return v;
}

}  // namespace

OracleResult synth_oracle(const std::vector<CellGroundTruth>& gt,
                          const GridSpec& spec, int predictors_per_cell,
                          int class_count, Representation representation,
                          const OracleConfig& cfg) {
  if (cfg.duplicates_per_segment < 1)
    throw std::invalid_argument("duplicates_per_segment must be >= 1");
  if (cfg.spurious_rate < 0.0 || cfg.spurious_rate > 1.0)
    throw std::invalid_argument("spurious_rate must be in [0,1]");
  if (cfg.jitter_sigma < 0.0)
    throw std::invalid_argument("jitter_sigma must be >= 0");

  OracleResult result{PredictorGrid(spec, predictors_per_cell, class_count,
                                    representation),
                      0};
  std::map<std::pair<int, int>, const CellGroundTruth*> by_cell;
  for (const CellGroundTruth& c : gt) by_cell[{c.cell_row, c.cell_col}] = &c;

  Rng rng(cfg.seed);
  for (int row = 0; row < spec.rows(); ++row) {
    for (int col = 0; col < spec.cols(); ++col) {
      std::vector<Predictor>& cell = result.grid.cell(row, col);
      int slot = 0;
      auto it = by_cell.find({row, col});
      if (it != by_cell.end()) {
        for (const auto& [geom, class_id] : it->second->segments) {
          const SegmentGeometry converted = convert(geom, representation);
          for (int d = 0; d < cfg.duplicates_per_segment; ++d) {
            if (slot >= predictors_per_cell) {
              ++result.overflow_dropped;
              continue;
            }
            Predictor& p = cell[slot++];
            p.g = cfg.jitter_sigma > 0.0
                      ? jitter_geometry(converted, cfg.jitter_sigma,
                                        spec.cell_px(), rng)
                      : converted;
            p.confidence = rng.uniform(cfg.matched_confidence.first,
                                       cfg.matched_confidence.second);
            p.class_probs = one_hot_probs(class_id, class_count);
          }
        }
      }
      for (; slot < predictors_per_cell; ++slot) {
        if (rng.uniform() < cfg.spurious_rate) {
          Predictor& p = cell[slot];
          p.g = random_geometry(representation, rng);
          p.confidence = rng.uniform(cfg.spurious_confidence.first,
                                     cfg.spurious_confidence.second);
          if (class_count > 0)
            p.class_probs = one_hot_probs(rng.uniform_int(0, class_count - 1),
                                          class_count);
        }
        // otherwise the zero-confidence placeholder stays
      }
    }
  }
  return result;
}

std::vector<ImageSegment> decode_grid(const PredictorGrid& grid) {
  std::vector<ImageSegment> out;
  out.reserve(static_cast<size_t>(grid.spec().cell_count()) *
              grid.predictors_per_cell());
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      for (const Predictor& p : grid.cell(row, col)) {
        std::optional<int> class_id;
        if (!p.class_probs.empty()) {
          const auto it =
              std::max_element(p.class_probs.begin(), p.class_probs.end());
          class_id = static_cast<int>(it - p.class_probs.begin());
        }
        out.push_back(to_image(p.g, row, col, grid.spec(), p.confidence, class_id));
      }
    }
  }
  return out;
}

std::vector<Polyline> synth_scene(const SceneConfig& cfg) {
  if (cfg.lanes < 1) throw std::invalid_argument("scene needs at least 1 lane");
  Rng rng(cfg.seed);
  std::vector<Polyline> out;
  const double w = cfg.width;
  const double h = cfg.height;
  for (int lane = 0; lane < cfg.lanes; ++lane) {
    const double base_x =
        w * (0.15 + 0.7 * (lane + rng.uniform(0.3, 0.7)) / cfg.lanes);
    const double top_y = h * rng.uniform(0.12, 0.3);
    const double amplitude = rng.uniform(8.0, 25.0);
    const double wavelength = rng.uniform(300.0, 700.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double slope = rng.uniform(-0.15, 0.15);

    Polyline p;
    if (cfg.class_count > 0) p.class_id = rng.uniform_int(0, cfg.class_count - 1);
    // Bottom-up traversal so extracted lanes flow toward the horizon.
    const double step = 4.0;
    for (double y = h; y >= top_y; y -= step) {
      const double x = base_x + slope * (y - h) +
                       amplitude *
                           std::sin(2.0 * std::numbers::pi * y / wavelength + phase);
      p.points.push_back({std::clamp(x, 1.0, w - 1.0), y});
    }
    if (p.points.size() < 2) continue;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gridline
