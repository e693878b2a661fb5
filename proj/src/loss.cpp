#include "gridline/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridline {

namespace {

void check_metric(const SegmentGeometry& g, Representation metric) {
  if (representation_of(g) != metric)
    throw std::invalid_argument("geometry representation does not match metric");
}

std::vector<double> one_hot(std::optional<int> class_id, int class_count) {
  std::vector<double> v(class_count, 0.0);
  if (class_count == 0) return v;
  if (!class_id.has_value())
    throw std::invalid_argument("ground truth class missing for classed grid");
  if (*class_id < 0 || *class_id >= class_count)
    throw std::invalid_argument("ground truth class out of range");
  v[*class_id] = 1.0;
  return v;
}

}  // namespace

PredictorGrid::PredictorGrid(GridSpec spec, int predictors_per_cell,
                             int class_count, Representation representation)
    : spec_(spec),
      predictors_per_cell_(predictors_per_cell),
      class_count_(class_count),
      representation_(representation) {
  if (predictors_per_cell <= 0)
    throw std::invalid_argument("predictors per cell must be positive");
  if (class_count < 0) throw std::invalid_argument("class count must be >= 0");
  cells_.assign(static_cast<size_t>(spec_.cell_count()),
                std::vector<Predictor>(predictors_per_cell, placeholder()));
}

Predictor PredictorGrid::placeholder() const {
  Predictor p;
  switch (representation_) {
    case Representation::kCartesian: p.g = CartesianPoints{}; break;
    case Representation::kBorder1D: p.g = BorderPoints1D{}; break;
    case Representation::kEuler: p.g = EulerAngles{}; break;
  }
  p.class_probs.assign(class_count_, 0.0);
  p.confidence = 0.0;
  return p;
}

std::vector<Predictor>& PredictorGrid::cell(int row, int col) {
  if (row < 0 || row >= spec_.rows() || col < 0 || col >= spec_.cols())
    throw std::out_of_range("cell out of bounds");
  return cells_[static_cast<size_t>(row) * spec_.cols() + col];
}

const std::vector<Predictor>& PredictorGrid::cell(int row, int col) const {
  if (row < 0 || row >= spec_.rows() || col < 0 || col >= spec_.cols())
    throw std::out_of_range("cell out of bounds");
  return cells_[static_cast<size_t>(row) * spec_.cols() + col];
}

void PredictorGrid::validate() const {
  for (const auto& cell : cells_) {
    if (static_cast<int>(cell.size()) != predictors_per_cell_)
      throw std::invalid_argument("cell does not hold exactly P predictors");
    for (const Predictor& p : cell) {
      if (representation_of(p.g) != representation_)
        throw std::invalid_argument("predictor representation mismatch");
      if (static_cast<int>(p.class_probs.size()) != class_count_)
        throw std::invalid_argument("class vector length mismatch");
    }
  }
}

Assignment match(const CellGroundTruth& gt, const std::vector<Predictor>& preds,
                 Representation metric) {
  const int n = static_cast<int>(gt.segments.size());
  const int m = static_cast<int>(preds.size());
  for (const auto& [g, cls] : gt.segments) check_metric(g, metric);
  for (const Predictor& p : preds) check_metric(p.g, metric);

  std::vector<double> dist(static_cast<size_t>(n) * m);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < m; ++k)
      dist[static_cast<size_t>(j) * m + k] =
          geometry_distance(gt.segments[j].first, preds[k].g);

  std::vector<bool> gt_used(n, false), pred_used(m, false);
  Assignment out;
  const int target = std::min(n, m);
  out.pairs.reserve(target);
  for (int step = 0; step < target; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bj = -1, bk = -1;
    for (int j = 0; j < n; ++j) {
      if (gt_used[j]) continue;
      for (int k = 0; k < m; ++k) {
        if (pred_used[k]) continue;
        const double d = dist[static_cast<size_t>(j) * m + k];
        if (d < best) {  // scan order is the (lower j, lower k) tie-break
          best = d;
          bj = j;
          bk = k;
        }
      }
    }
    gt_used[bj] = true;
    pred_used[bk] = true;
    out.pairs.emplace_back(bj, bk);
  }
  out.unmatched_gt = n - target;
  return out;
}

double loss_loc(const Assignment& assignment, const CellGroundTruth& gt,
                const std::vector<Predictor>& preds, Representation metric) {
  double sum = 0.0;
  for (const auto& [j, k] : assignment.pairs) {
    check_metric(gt.segments[j].first, metric);
    sum += geometry_distance(gt.segments[j].first, preds[k].g);
  }
  return sum;
}

std::pair<double, double> loss_conf(const Assignment& assignment,
                                    const std::vector<Predictor>& preds) {
  std::vector<bool> assigned(preds.size(), false);
  for (const auto& [j, k] : assignment.pairs) assigned[k] = true;
  double resp = 0.0, noresp = 0.0;
  for (size_t k = 0; k < preds.size(); ++k) {
    const double c = preds[k].confidence;
    if (assigned[k]) resp += (c - 1.0) * (c - 1.0);
    else noresp += c * c;
  }
  return {resp, noresp};
}

double loss_class(const Assignment& assignment, const CellGroundTruth& gt,
                  const std::vector<Predictor>& preds, int class_count) {
  if (class_count == 0) return 0.0;
  double sum = 0.0;
  for (const auto& [j, k] : assignment.pairs) {
    const std::vector<double> target = one_hot(gt.segments[j].second, class_count);
    const std::vector<double>& probs = preds[k].class_probs;
    if (static_cast<int>(probs.size()) != class_count)
      throw std::invalid_argument("class vector length mismatch");
    for (int c = 0; c < class_count; ++c) {
      const double d = probs[c] - target[c];
      sum += d * d;
    }
  }
  return sum;
}

LossBreakdown total_loss(const std::vector<CellGroundTruth>& grid_gt,
                         const PredictorGrid& grid, const LossWeights& weights,
                         Representation metric) {
  if (grid.representation() != metric)
    throw std::invalid_argument("grid representation does not match metric");
  std::vector<const CellGroundTruth*> by_cell(
      static_cast<size_t>(grid.spec().cell_count()), nullptr);
  for (const CellGroundTruth& c : grid_gt) {
    if (c.cell_row < 0 || c.cell_row >= grid.spec().rows() || c.cell_col < 0 ||
        c.cell_col >= grid.spec().cols())
      throw std::invalid_argument("ground truth cell outside the grid");
    by_cell[static_cast<size_t>(c.cell_row) * grid.spec().cols() + c.cell_col] = &c;
  }

  LossBreakdown out;
  out.weights = weights;
  static const CellGroundTruth empty_cell{};
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      const CellGroundTruth* gt =
          by_cell[static_cast<size_t>(row) * grid.spec().cols() + col];
      const CellGroundTruth& cell_gt = gt ? *gt : empty_cell;
      const std::vector<Predictor>& preds = grid.cell(row, col);
      const Assignment a = match(cell_gt, preds, metric);
      out.loc += loss_loc(a, cell_gt, preds, metric);
      const auto [resp, noresp] = loss_conf(a, preds);
      out.resp += resp;
      out.noresp += noresp;
      out.class_term += loss_class(a, cell_gt, preds, grid.class_count());
      out.assigned += static_cast<long>(a.pairs.size());
      out.unmatched_gt += a.unmatched_gt;
    }
  }
  out.total = weights.loc * out.loc + weights.resp * out.resp +
              weights.noresp * out.noresp + weights.classification * out.class_term;
  return out;
}

int geometry_parameter_count(Representation rep) {
  switch (rep) {
    case Representation::kCartesian: return 4;
    case Representation::kBorder1D: return 2;
    case Representation::kEuler: return 4;
  }
  return 0;
}

std::vector<double> flatten_parameters(const PredictorGrid& grid) {
  std::vector<double> out;
  const int gp = geometry_parameter_count(grid.representation());
  out.reserve(static_cast<size_t>(grid.spec().cell_count()) *
              grid.predictors_per_cell() * (gp + grid.class_count() + 1));
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      for (const Predictor& p : grid.cell(row, col)) {
        if (const auto* c = std::get_if<CartesianPoints>(&p.g)) {
          out.insert(out.end(), {c->start.x, c->start.y, c->end.x, c->end.y});
        } else if (const auto* b = std::get_if<BorderPoints1D>(&p.g)) {
          out.insert(out.end(), {b->start, b->end});
        } else {
          const auto& e = std::get<EulerAngles>(p.g);
          out.insert(out.end(), {e.cos_a, e.sin_a, e.cos_b, e.sin_b});
        }
        out.insert(out.end(), p.class_probs.begin(), p.class_probs.end());
        out.push_back(p.confidence);
      }
    }
  }
  return out;
}

PredictorGrid with_parameters(const PredictorGrid& grid,
                              const std::vector<double>& params) {
  PredictorGrid out(grid.spec(), grid.predictors_per_cell(), grid.class_count(),
                    grid.representation());
  const int gp = geometry_parameter_count(grid.representation());
  const size_t stride = static_cast<size_t>(gp) + grid.class_count() + 1;
  const size_t expected = static_cast<size_t>(grid.spec().cell_count()) *
                          grid.predictors_per_cell() * stride;
  if (params.size() != expected)
    throw std::invalid_argument("parameter vector length mismatch");
  size_t idx = 0;
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      for (Predictor& p : out.cell(row, col)) {
        switch (grid.representation()) {
          case Representation::kCartesian:
            p.g = CartesianPoints{{params[idx], params[idx + 1]},
                                  {params[idx + 2], params[idx + 3]}};
            break;
          case Representation::kBorder1D:
            p.g = BorderPoints1D{params[idx], params[idx + 1]};
            break;
          case Representation::kEuler:
            p.g = EulerAngles::raw(params[idx], params[idx + 1], params[idx + 2],
                                   params[idx + 3]);
            break;
        }
        idx += gp;
        p.class_probs.assign(params.begin() + idx, params.begin() + idx +
                             grid.class_count());
        idx += grid.class_count();
        p.confidence = params[idx++];
      }
    }
  }
  return out;
}

namespace {

// d distance(g, p) / d p for the predictor-side geometry parameters.
void geometry_gradient(const SegmentGeometry& gt, const SegmentGeometry& pred,
                       double scale, double* out) {
  if (const auto* pc = std::get_if<CartesianPoints>(&pred)) {
    const auto& gc = std::get<CartesianPoints>(gt);
    const Vec2 ds = pc->start - gc.start;
    const Vec2 de = pc->end - gc.end;
    const double ns = norm(ds), ne = norm(de);
    if (ns > 0.0) {
      out[0] += scale * ds.x / ns;
      out[1] += scale * ds.y / ns;
    }
    if (ne > 0.0) {
      out[2] += scale * de.x / ne;
      out[3] += scale * de.y / ne;
    }
  } else if (const auto* pb = std::get_if<BorderPoints1D>(&pred)) {
    const auto& gb = std::get<BorderPoints1D>(gt);
    auto endpoint = [&](double g, double p, double* slot) {
      const double a = std::abs(g - p);
      if (a == 0.0 || a == 0.5) return;  // non-differentiable points
      const double sign = g > p ? 1.0 : -1.0;
      // term = min(a, 1-a); d a / d p = -sign(g - p)
      *slot += scale * (a < 0.5 ? -sign : sign);
    };
    endpoint(gb.start, pb->start, &out[0]);
    endpoint(gb.end, pb->end, &out[1]);
  } else {
    const auto& pe = std::get<EulerAngles>(pred);
    const auto& ge = std::get<EulerAngles>(gt);
    const double u[4] = {pe.cos_a - ge.cos_a, pe.sin_a - ge.sin_a,
                         pe.cos_b - ge.cos_b, pe.sin_b - ge.sin_b};
    const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
    if (n == 0.0) return;
    for (int i = 0; i < 4; ++i) out[i] += scale * 0.25 * u[i] / n;
  }
}

}  // namespace

std::vector<double> loss_gradients(const std::vector<CellGroundTruth>& grid_gt,
                                   const PredictorGrid& grid,
                                   const LossWeights& weights,
                                   Representation metric) {
  std::vector<const CellGroundTruth*> by_cell(
      static_cast<size_t>(grid.spec().cell_count()), nullptr);
  for (const CellGroundTruth& c : grid_gt)
    by_cell[static_cast<size_t>(c.cell_row) * grid.spec().cols() + c.cell_col] = &c;

  const int gp = geometry_parameter_count(grid.representation());
  const size_t stride = static_cast<size_t>(gp) + grid.class_count() + 1;
  std::vector<double> grad(static_cast<size_t>(grid.spec().cell_count()) *
                               grid.predictors_per_cell() * stride,
                           0.0);
  static const CellGroundTruth empty_cell{};
  size_t cell_base = 0;
  for (int row = 0; row < grid.spec().rows(); ++row) {
    for (int col = 0; col < grid.spec().cols(); ++col) {
      const CellGroundTruth* gt =
          by_cell[static_cast<size_t>(row) * grid.spec().cols() + col];
      const CellGroundTruth& cell_gt = gt ? *gt : empty_cell;
      const std::vector<Predictor>& preds = grid.cell(row, col);
      const Assignment a = match(cell_gt, preds, metric);
      std::vector<bool> assigned(preds.size(), false);
      for (const auto& [j, k] : a.pairs) {
        assigned[k] = true;
        double* base = grad.data() + cell_base + static_cast<size_t>(k) * stride;
        geometry_gradient(cell_gt.segments[j].first, preds[k].g, weights.loc,
                          base);
        if (grid.class_count() > 0) {
          const std::vector<double> target =
              one_hot(cell_gt.segments[j].second, grid.class_count());
          for (int c = 0; c < grid.class_count(); ++c)
            base[gp + c] += weights.classification * 2.0 *
                            (preds[k].class_probs[c] - target[c]);
        }
      }
      for (size_t k = 0; k < preds.size(); ++k) {
        double* base = grad.data() + cell_base + k * stride;
        const double c = preds[k].confidence;
        base[stride - 1] += assigned[k] ? weights.resp * 2.0 * (c - 1.0)
                                        : weights.noresp * 2.0 * c;
      }
      cell_base += static_cast<size_t>(grid.predictors_per_cell()) * stride;
    }
  }
  return grad;
}

}  // namespace gridline
