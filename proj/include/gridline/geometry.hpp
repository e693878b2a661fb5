#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <variant>

namespace gridline {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
inline Vec2 operator/(Vec2 v, double s) { return {v.x / s, v.y / s}; }
inline bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Uniform cell grid over an image. Construction fails unless the image
/// tiles exactly and the cell size is one of 32, 16 or 8 px.
class GridSpec {
 public:
  GridSpec(int image_width, int image_height, int cell_px);

  int image_width() const { return image_width_; }
  int image_height() const { return image_height_; }
  int cell_px() const { return cell_px_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int cell_count() const { return rows_ * cols_; }
  /// Grid scale relative to the 32 px base resolution (1.0, 0.5, 0.25).
  double kappa() const { return cell_px_ / 32.0; }

 private:
  int image_width_;
  int image_height_;
  int cell_px_;
  int rows_;
  int cols_;
};

enum class Representation { kCartesian, kBorder1D, kEuler };

std::string_view to_string(Representation rep);
Representation representation_from_string(std::string_view name);

/// Segment as two free endpoints in cell-normalized [0,1]^2 coordinates.
struct CartesianPoints {
  Vec2 start;
  Vec2 end;
};

/// Segment endpoints as scalar positions along the cell border, measured
/// clockwise from the top-left corner with the full perimeter scaled to 1.
/// A point exactly on a corner belongs to the side that begins there.
struct BorderPoints1D {
  double start = 0.0;
  double end = 0.0;
};

/// Segment endpoints as unit-circle components of the two border-point
/// angles. Angles are measured clockwise from the image up direction (-y)
/// around the cell center.
struct EulerAngles {
  double cos_a = 1.0;
  double sin_a = 0.0;
  double cos_b = 1.0;
  double sin_b = 0.0;

  EulerAngles() = default;
  /// Normalizes each (cos, sin) pair; throws on a zero-norm pair.
  EulerAngles(double ca, double sa, double cb, double sb);
  static EulerAngles from_angles(double alpha, double beta);
  /// Bypasses normalization; used where the components are free parameters.
  static EulerAngles raw(double ca, double sa, double cb, double sb);
};

using SegmentGeometry = std::variant<CartesianPoints, BorderPoints1D, EulerAngles>;

Representation representation_of(const SegmentGeometry& g);

// Distances between two segments in the same representation.
double distance_cartesian(const CartesianPoints& g, const CartesianPoints& h);
double distance_border1d(const BorderPoints1D& g, const BorderPoints1D& h);
double distance_euler(const EulerAngles& g, const EulerAngles& h);
/// Dispatches on the variant; throws if the representations differ.
double geometry_distance(const SegmentGeometry& g, const SegmentGeometry& h);

/// Point on the unit-square border at clockwise arc position t in [0,1).
Vec2 border_point(double t);
/// Inverse of border_point with corner ownership by the clockwise-next side.
/// Throws if p does not lie on the border (tolerance 1e-9).
double border_position(Vec2 p);
/// Angle of the ray from the cell center (0.5,0.5) through p, clockwise
/// from -y.
double angle_of_border_point(Vec2 p);
/// Border point hit by the ray from the cell center with the given
/// direction components (cos a, sin a) against -y.
Vec2 border_point_at_angle(double cos_a, double sin_a);

CartesianPoints to_cartesian(const SegmentGeometry& g);
BorderPoints1D to_border1d(const SegmentGeometry& g);
EulerAngles to_euler(const SegmentGeometry& g);
SegmentGeometry convert(const SegmentGeometry& g, Representation target);

/// Segment in absolute image pixels with detection confidence.
struct ImageSegment {
  Vec2 start;
  Vec2 end;
  double confidence = 0.0;
  std::optional<int> class_id;
};

/// Places a cell-local segment into image coordinates. Endpoints are clamped
/// to the image frame and the confidence to [0,1]. Throws if the cell indices
/// fall outside the grid.
ImageSegment to_image(const SegmentGeometry& g, int cell_row, int cell_col,
                      const GridSpec& spec, double confidence,
                      std::optional<int> class_id = std::nullopt);

}  // namespace gridline
