#include "gridline/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridline {

namespace {

// Index of the knot span containing u (NURBS-book style).
int find_span(const std::vector<double>& knots, int degree, int n_coefs,
              double u) {
  const int last = n_coefs - 1;
  if (u >= knots[last + 1]) return last;
  if (u <= knots[degree]) return degree;
  int lo = degree, hi = last + 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (u < knots[mid]) hi = mid;
    else lo = mid;
  }
  return lo;
}

// Nonzero basis values N_{span-degree..span}(u).
void basis_funs(const std::vector<double>& knots, int degree, int span,
                double u, double* out) {
  std::vector<double> left(degree + 1), right(degree + 1);
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

// Dense Gaussian elimination with partial pivoting; b holds 2 columns (x,y).
bool solve_dense(std::vector<double>& a, std::vector<Vec2>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r) * n + col]) >
          std::abs(a[static_cast<size_t>(pivot) * n + col]))
        pivot = r;
    if (std::abs(a[static_cast<size_t>(pivot) * n + col]) < 1e-12) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<size_t>(col) * n + c],
                  a[static_cast<size_t>(pivot) * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double inv = 1.0 / a[static_cast<size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
      b[r] = b[r] - f * b[col];
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    Vec2 acc = b[col];
    for (int c = col + 1; c < n; ++c)
      acc = acc - a[static_cast<size_t>(col) * n + c] * b[c];
    b[col] = acc / a[static_cast<size_t>(col) * n + col];
  }
  return true;
}

struct Normalization {
  Vec2 offset;
  Vec2 scale;  // multiplies normalized -> original
};

Normalization axis_normalization(const std::vector<Vec2>& pts) {
  Vec2 lo = pts.front(), hi = pts.front();
  for (const Vec2& p : pts) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  Vec2 range{hi.x - lo.x, hi.y - lo.y};
  if (range.x <= 0.0) range.x = 1.0;
  if (range.y <= 0.0) range.y = 1.0;
  return {lo, range};
}

std::vector<double> chord_parameters(const std::vector<Vec2>& pts) {
  std::vector<double> u(pts.size(), 0.0);
  for (size_t i = 1; i < pts.size(); ++i)
    u[i] = u[i - 1] + distance(pts[i - 1], pts[i]);
  const double total = u.back();
  if (total > 0.0)
    for (double& v : u) v /= total;
  else
    for (size_t i = 0; i < u.size(); ++i) u[i] = static_cast<double>(i) / (u.size() - 1);
  return u;
}

std::vector<double> make_knots(const std::vector<double>& interior, int degree) {
  std::vector<double> knots;
  knots.reserve(interior.size() + 2 * (degree + 1));
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  knots.insert(knots.end(), interior.begin(), interior.end());
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);
  return knots;
}

// Least-squares fit in normalized coordinates; false on singular systems.
bool lsq_fit(const std::vector<double>& u, const std::vector<Vec2>& pts,
             const std::vector<double>& knots, int degree,
             std::vector<Vec2>& coefs_out) {
  const int n = static_cast<int>(knots.size()) - degree - 1;
  std::vector<double> ata(static_cast<size_t>(n) * n, 0.0);
  std::vector<Vec2> atb(n, Vec2{});
  std::vector<double> basis(degree + 1);
  for (size_t row = 0; row < u.size(); ++row) {
    const int span = find_span(knots, degree, n, u[row]);
    basis_funs(knots, degree, span, u[row], basis.data());
    for (int a = 0; a <= degree; ++a) {
      const int ia = span - degree + a;
      for (int b = 0; b <= degree; ++b) {
        const int ib = span - degree + b;
        ata[static_cast<size_t>(ia) * n + ib] += basis[a] * basis[b];
      }
      atb[ia] = atb[ia] + basis[a] * pts[row];
    }
  }
  if (!solve_dense(ata, atb, n)) return false;
  coefs_out = std::move(atb);
  return true;
}

double residual_normalized(const std::vector<double>& u,
                           const std::vector<Vec2>& pts,
                           const std::vector<double>& knots, int degree,
                           const std::vector<Vec2>& coefs) {
  const int n = static_cast<int>(coefs.size());
  std::vector<double> basis(degree + 1);
  double sum = 0.0;
  for (size_t row = 0; row < u.size(); ++row) {
    const int span = find_span(knots, degree, n, u[row]);
    basis_funs(knots, degree, span, u[row], basis.data());
    Vec2 fit{};
    for (int a = 0; a <= degree; ++a)
      fit = fit + basis[a] * coefs[span - degree + a];
    const Vec2 r = fit - pts[row];
    sum += r.x * r.x + r.y * r.y;
  }
  return sum;
}

}  // namespace

Vec2 BSpline2D::eval(double u) const {
  const int n = static_cast<int>(coefs.size());
  const int span = find_span(knots, degree, n, std::clamp(u, 0.0, 1.0));
  std::vector<double> basis(degree + 1);
  basis_funs(knots, degree, span, std::clamp(u, 0.0, 1.0), basis.data());
  Vec2 out{};
  for (int a = 0; a <= degree; ++a)
    out = out + basis[a] * coefs[span - degree + a];
  return out;
}

BSpline2D fit_smoothing_spline(const std::vector<Vec2>& points, int degree,
                               double smoothing) {
  if (points.size() < 2)
    throw std::invalid_argument("spline fit needs at least 2 points");
  if (degree < 1) throw std::invalid_argument("spline degree must be >= 1");

  // Collapse consecutive duplicates so chord parameters strictly increase.
  std::vector<Vec2> pts;
  pts.reserve(points.size());
  for (const Vec2& p : points)
    if (pts.empty() || distance(pts.back(), p) > 1e-12) pts.push_back(p);
  if (pts.size() < 2) pts.push_back(pts.front() + Vec2{0.0, 0.0});

  const int m = static_cast<int>(pts.size());
  const int k = std::min(degree, m - 1);
  const Normalization nrm = axis_normalization(pts);
  std::vector<Vec2> npts(pts.size());
  for (size_t i = 0; i < pts.size(); ++i)
    npts[i] = Vec2{(pts[i].x - nrm.offset.x) / nrm.scale.x,
                   (pts[i].y - nrm.offset.y) / nrm.scale.y};
  const std::vector<double> u = chord_parameters(pts);

  // Interior knots of the full interpolation knot vector (knot averaging).
  const int full = m - k - 1;
  std::vector<double> full_interior(full);
  for (int j = 0; j < full; ++j) {
    double acc = 0.0;
    for (int d = 1; d <= k; ++d) acc += u[j + d];
    full_interior[j] = acc / k;
  }

  BSpline2D best;
  best.degree = k;
  int g = 0;
  while (true) {
    std::vector<double> interior(g);
    for (int t = 0; t < g; ++t)
      interior[t] = full_interior[static_cast<size_t>(t + 1) * full / (g + 1)];
    const std::vector<double> knots = make_knots(interior, k);
    std::vector<Vec2> coefs;
    const bool ok = lsq_fit(u, npts, knots, k, coefs);
    if (ok) {
      const double resid = residual_normalized(u, npts, knots, k, coefs);
      if (resid <= smoothing || g >= full) {
        best.knots = knots;
        best.coefs = std::move(coefs);
        break;
      }
    } else if (g >= full) {
      throw std::runtime_error("spline fit is singular");
    }
    g = std::min(full, 2 * g + 1);
  }

  // Map the control points back to image coordinates (affine invariance).
  for (Vec2& c : best.coefs)
    c = Vec2{c.x * nrm.scale.x + nrm.offset.x, c.y * nrm.scale.y + nrm.offset.y};
  return best;
}

double spline_residual(const BSpline2D& spline, const std::vector<Vec2>& points) {
  std::vector<Vec2> pts;
  for (const Vec2& p : points)
    if (pts.empty() || distance(pts.back(), p) > 1e-12) pts.push_back(p);
  if (pts.size() < 2) return 0.0;
  const Normalization nrm = axis_normalization(pts);
  const std::vector<double> u = chord_parameters(pts);
  double sum = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const Vec2 fit = spline.eval(u[i]);
    const double rx = (fit.x - pts[i].x) / nrm.scale.x;
    const double ry = (fit.y - pts[i].y) / nrm.scale.y;
    sum += rx * rx + ry * ry;
  }
  return sum;
}

std::vector<Vec2> eval_uniform(const BSpline2D& spline, int count) {
  if (count < 2) throw std::invalid_argument("need at least 2 samples");
  std::vector<Vec2> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = spline.eval(static_cast<double>(i) / (count - 1));
  return out;
}

}  // namespace gridline
