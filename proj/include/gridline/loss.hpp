#pragma once

#include <utility>
#include <vector>

#include "gridline/discretize.hpp"
#include "gridline/geometry.hpp"

namespace gridline {

/// One per-cell output slot: geometry, class distribution and confidence.
struct Predictor {
  SegmentGeometry g;
  std::vector<double> class_probs;
  double confidence = 0.0;
};

/// Dense grid of predictors: every cell holds exactly `predictors_per_cell`.
class PredictorGrid {
 public:
  PredictorGrid(GridSpec spec, int predictors_per_cell, int class_count,
                Representation representation);

  const GridSpec& spec() const { return spec_; }
  int predictors_per_cell() const { return predictors_per_cell_; }
  int class_count() const { return class_count_; }
  Representation representation() const { return representation_; }

  std::vector<Predictor>& cell(int row, int col);
  const std::vector<Predictor>& cell(int row, int col) const;

  /// Throws unless every cell holds exactly P predictors of the declared
  /// representation with class vectors of length C.
  void validate() const;

  /// Placeholder predictor: confidence 0, canonical geometry, zero classes.
  Predictor placeholder() const;

 private:
  GridSpec spec_;
  int predictors_per_cell_;
  int class_count_;
  Representation representation_;
  std::vector<std::vector<Predictor>> cells_;
};

/// Responsibility assignment for one cell: (gt index, predictor index) pairs.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;
  int unmatched_gt = 0;
};

struct LossWeights {
  double loc = 1.0;
  double resp = 1.0;
  double noresp = 1.0;
  double classification = 1.0;
};

struct LossBreakdown {
  double loc = 0.0;
  double resp = 0.0;
  double noresp = 0.0;
  double class_term = 0.0;
  double total = 0.0;
  LossWeights weights;
  long assigned = 0;
  long unmatched_gt = 0;
};

/// Greedy responsibility matching within one cell: repeatedly assigns the
/// globally closest unassigned (ground truth, predictor) pair. Ties break on
/// the lower gt index, then the lower predictor index.
Assignment match(const CellGroundTruth& gt, const std::vector<Predictor>& preds,
                 Representation metric);

double loss_loc(const Assignment& assignment, const CellGroundTruth& gt,
                const std::vector<Predictor>& preds, Representation metric);

/// Returns (responsible, non-responsible) confidence error sums.
std::pair<double, double> loss_conf(const Assignment& assignment,
                                    const std::vector<Predictor>& preds);

double loss_class(const Assignment& assignment, const CellGroundTruth& gt,
                  const std::vector<Predictor>& preds, int class_count);

LossBreakdown total_loss(const std::vector<CellGroundTruth>& grid_gt,
                         const PredictorGrid& grid, const LossWeights& weights,
                         Representation metric);

// --- Parameter-vector view used by the analytic gradients and their
// --- finite-difference verification. Layout per predictor: geometry
// --- components, class probabilities, confidence; cells row-major.

int geometry_parameter_count(Representation rep);
std::vector<double> flatten_parameters(const PredictorGrid& grid);
/// Rebuilds a grid from a raw parameter vector without normalization or
/// clamping, so the loss stays an unconstrained function of the parameters.
PredictorGrid with_parameters(const PredictorGrid& grid,
                              const std::vector<double>& params);

/// Analytic gradient of total_loss w.r.t. flatten_parameters(grid).
/// Undefined exactly at matching ties and zero-distance pairs.
std::vector<double> loss_gradients(const std::vector<CellGroundTruth>& grid_gt,
                                   const PredictorGrid& grid,
                                   const LossWeights& weights,
                                   Representation metric);

}  // namespace gridline
