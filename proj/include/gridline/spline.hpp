#pragma once

#include <vector>

#include "gridline/geometry.hpp"

namespace gridline {

/// Parametric B-spline curve on u in [0,1].
struct BSpline2D {
  int degree = 3;
  std::vector<double> knots;
  std::vector<Vec2> coefs;

  Vec2 eval(double u) const;
};

/// Least-squares smoothing fit through the points, parameterized by
/// normalized cumulative chord length. Interior knots are inserted (taken
/// from the interpolation knot vector) until the residual constraint
/// sum ||r||^2 <= smoothing holds on coordinates normalized to [0,1] per
/// axis; smoothing 0 therefore interpolates. The effective degree drops to
/// n-1 for fewer than degree+1 points.
BSpline2D fit_smoothing_spline(const std::vector<Vec2>& points, int degree,
                               double smoothing);

/// Residual of the fit against its data in normalized coordinates.
double spline_residual(const BSpline2D& spline, const std::vector<Vec2>& points);

/// Evaluates the curve at `count` uniformly spaced parameters (count >= 2).
std::vector<Vec2> eval_uniform(const BSpline2D& spline, int count);

}  // namespace gridline
