#include "gridline/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace gridline {

namespace {

constexpr double kBorderTol = 1e-9;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

GridSpec::GridSpec(int image_width, int image_height, int cell_px)
    : image_width_(image_width), image_height_(image_height), cell_px_(cell_px) {
  if (cell_px != 32 && cell_px != 16 && cell_px != 8)
    throw std::invalid_argument("cell_px must be 32, 16 or 8");
  if (image_width <= 0 || image_height <= 0)
    throw std::invalid_argument("image dimensions must be positive");
  if (image_width % cell_px != 0 || image_height % cell_px != 0)
    throw std::invalid_argument("image dimensions must be divisible by cell_px");
  rows_ = image_height / cell_px;
  cols_ = image_width / cell_px;
}

std::string_view to_string(Representation rep) {
  switch (rep) {
    case Representation::kCartesian: return "cartesian";
    case Representation::kBorder1D: return "border1d";
    case Representation::kEuler: return "euler";
  }
  return "unknown";
}

Representation representation_from_string(std::string_view name) {
  if (name == "cartesian") return Representation::kCartesian;
  if (name == "border1d") return Representation::kBorder1D;
  if (name == "euler") return Representation::kEuler;
  throw std::invalid_argument("unknown representation: " + std::string(name));
}

EulerAngles::EulerAngles(double ca, double sa, double cb, double sb) {
  const double na = std::sqrt(ca * ca + sa * sa);
  const double nb = std::sqrt(cb * cb + sb * sb);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("euler components must not be the zero vector");
  // Keep already-unit inputs bit-exact so file round-trips stay byte-stable.
  if (std::abs(na * na - 1.0) <= 1e-12) {
    cos_a = ca;
    sin_a = sa;
  } else {
    cos_a = ca / na;
    sin_a = sa / na;
  }
  if (std::abs(nb * nb - 1.0) <= 1e-12) {
    cos_b = cb;
    sin_b = sb;
  } else {
    cos_b = cb / nb;
    sin_b = sb / nb;
  }
}

EulerAngles EulerAngles::from_angles(double alpha, double beta) {
  EulerAngles e;
  e.cos_a = std::cos(alpha);
  e.sin_a = std::sin(alpha);
  e.cos_b = std::cos(beta);
  e.sin_b = std::sin(beta);
  return e;
}

EulerAngles EulerAngles::raw(double ca, double sa, double cb, double sb) {
  EulerAngles e;
  e.cos_a = ca;
  e.sin_a = sa;
  e.cos_b = cb;
  e.sin_b = sb;
  return e;
}

Representation representation_of(const SegmentGeometry& g) {
  switch (g.index()) {
    case 0: return Representation::kCartesian;
    case 1: return Representation::kBorder1D;
    default: return Representation::kEuler;
  }
}

double distance_cartesian(const CartesianPoints& g, const CartesianPoints& h) {
  return distance(g.start, h.start) + distance(g.end, h.end);
}

double distance_border1d(const BorderPoints1D& g, const BorderPoints1D& h) {
  auto term = [](double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
  };
  return term(g.start, h.start) + term(g.end, h.end);
}

double distance_euler(const EulerAngles& g, const EulerAngles& h) {
  const double d0 = g.cos_a - h.cos_a;
  const double d1 = g.sin_a - h.sin_a;
  const double d2 = g.cos_b - h.cos_b;
  const double d3 = g.sin_b - h.sin_b;
  return 0.25 * std::sqrt(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3);
}

double geometry_distance(const SegmentGeometry& g, const SegmentGeometry& h) {
  if (g.index() != h.index())
    throw std::invalid_argument("geometry representation mismatch");
  if (const auto* gc = std::get_if<CartesianPoints>(&g))
    return distance_cartesian(*gc, std::get<CartesianPoints>(h));
  if (const auto* gb = std::get_if<BorderPoints1D>(&g))
    return distance_border1d(*gb, std::get<BorderPoints1D>(h));
  return distance_euler(std::get<EulerAngles>(g), std::get<EulerAngles>(h));
}

Vec2 border_point(double t) {
  t -= std::floor(t);  // wrap into [0,1)
  if (t < 0.25) return {4.0 * t, 0.0};
  if (t < 0.5) return {1.0, 4.0 * (t - 0.25)};
  if (t < 0.75) return {1.0 - 4.0 * (t - 0.5), 1.0};
  return {0.0, 1.0 - 4.0 * (t - 0.75)};
}

double border_position(Vec2 p) {
  const double x = std::clamp(p.x, 0.0, 1.0);
  const double y = std::clamp(p.y, 0.0, 1.0);
  if (std::abs(p.x - x) > kBorderTol || std::abs(p.y - y) > kBorderTol)
    throw std::invalid_argument("point outside the unit cell");
  // Side checks in clockwise order; corners fall to the side they begin.
  if (std::abs(y) <= kBorderTol && x < 1.0 - kBorderTol) return 0.25 * x;
  if (std::abs(x - 1.0) <= kBorderTol && y < 1.0 - kBorderTol) return 0.25 + 0.25 * y;
  if (std::abs(y - 1.0) <= kBorderTol && x > kBorderTol) return 0.5 + 0.25 * (1.0 - x);
  if (std::abs(x) <= kBorderTol) return y > kBorderTol ? 0.75 + 0.25 * (1.0 - y) : 0.0;
  throw std::invalid_argument("point not on the cell border");
}

double angle_of_border_point(Vec2 p) {
  const Vec2 v{p.x - 0.5, p.y - 0.5};
  return std::atan2(v.x, -v.y);
}

Vec2 border_point_at_angle(double cos_a, double sin_a) {
  const double n = std::sqrt(cos_a * cos_a + sin_a * sin_a);
  if (n == 0.0) throw std::invalid_argument("zero direction");
  // Direction of the ray in cell coordinates (y grows downward).
  const double dx = sin_a / n;
  const double dy = -cos_a / n;
  double tx = std::numeric_limits<double>::infinity();
  double ty = std::numeric_limits<double>::infinity();
  if (dx > 0.0) tx = 0.5 / dx;
  else if (dx < 0.0) tx = -0.5 / dx;
  if (dy > 0.0) ty = 0.5 / dy;
  else if (dy < 0.0) ty = -0.5 / dy;
  const double t = std::min(tx, ty);
  Vec2 p{0.5 + t * dx, 0.5 + t * dy};
  // Snap the coordinates that hit a border plane exactly.
  if (tx <= ty) p.x = dx > 0.0 ? 1.0 : 0.0;
  if (ty <= tx) p.y = dy > 0.0 ? 1.0 : 0.0;
  p.x = clamp01(p.x);
  p.y = clamp01(p.y);
  return p;
}

CartesianPoints to_cartesian(const SegmentGeometry& g) {
  if (const auto* gc = std::get_if<CartesianPoints>(&g)) return *gc;
  if (const auto* gb = std::get_if<BorderPoints1D>(&g))
    return {border_point(gb->start), border_point(gb->end)};
  const auto& ge = std::get<EulerAngles>(g);
  return {border_point_at_angle(ge.cos_a, ge.sin_a),
          border_point_at_angle(ge.cos_b, ge.sin_b)};
}

BorderPoints1D to_border1d(const SegmentGeometry& g) {
  if (const auto* gb = std::get_if<BorderPoints1D>(&g)) return *gb;
  const CartesianPoints c = to_cartesian(g);
  return {border_position(c.start), border_position(c.end)};
}

EulerAngles to_euler(const SegmentGeometry& g) {
  if (const auto* ge = std::get_if<EulerAngles>(&g)) return *ge;
  const CartesianPoints c = to_cartesian(g);
  return EulerAngles::from_angles(angle_of_border_point(c.start),
                                  angle_of_border_point(c.end));
}

SegmentGeometry convert(const SegmentGeometry& g, Representation target) {
  switch (target) {
    case Representation::kCartesian: return to_cartesian(g);
    case Representation::kBorder1D: return to_border1d(g);
    case Representation::kEuler: return to_euler(g);
  }
  throw std::invalid_argument("unknown representation");
}

ImageSegment to_image(const SegmentGeometry& g, int cell_row, int cell_col,
                      const GridSpec& spec, double confidence,
                      std::optional<int> class_id) {
  if (cell_row < 0 || cell_row >= spec.rows() || cell_col < 0 ||
      cell_col >= spec.cols())
    throw std::out_of_range("cell out of bounds");
  const CartesianPoints c = to_cartesian(g);
  const double cell = spec.cell_px();
  auto place = [&](Vec2 p) {
    Vec2 q{(cell_col + p.x) * cell, (cell_row + p.y) * cell};
    q.x = std::clamp(q.x, 0.0, static_cast<double>(spec.image_width()));
    q.y = std::clamp(q.y, 0.0, static_cast<double>(spec.image_height()));
    return q;
  };
  return {place(c.start), place(c.end), clamp01(confidence), class_id};
}

}  // namespace gridline
