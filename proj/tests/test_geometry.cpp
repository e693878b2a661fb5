#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gridline/geometry.hpp"
#include "gridline/rng.hpp"

using namespace gridline;

namespace {

SegmentGeometry random_border_segment(Rng& rng) {
  // Stay away from exact corners; those are covered separately.
  auto pos = [&] {
    double t = rng.uniform();
    while (std::abs(t - std::round(t * 4.0) / 4.0) < 1e-6) t = rng.uniform();
    return t;
  };
  return BorderPoints1D{pos(), pos()};
}

}  // namespace

TEST_CASE("grid spec validates tiling and cell size") {
  const GridSpec spec(640, 320, 32);
  CHECK(spec.rows() == 10);
  CHECK(spec.cols() == 20);
  CHECK(spec.cell_count() == 200);
  CHECK(spec.kappa() == doctest::Approx(1.0));
  CHECK(GridSpec(640, 320, 16).kappa() == doctest::Approx(0.5));
  CHECK_THROWS_AS(GridSpec(630, 320, 32), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(640, 320, 24), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(0, 320, 32), std::invalid_argument);
}

TEST_CASE("cartesian distance matches frozen examples") {
  const CartesianPoints same{{0.3, 0.3}, {0.7, 0.7}};
  CHECK(distance_cartesian(same, same) == 0.0);
  const CartesianPoints g{{0, 0}, {1, 1}};
  const CartesianPoints h{{0, 1}, {1, 0}};
  CHECK(distance_cartesian(g, h) == doctest::Approx(2.0));
  const CartesianPoints a{{0, 0}, {0, 0}};
  const CartesianPoints b{{0.3, 0.4}, {0.3, 0.4}};
  CHECK(distance_cartesian(a, b) == doctest::Approx(1.0));
}

TEST_CASE("border1d distance matches frozen examples") {
  const BorderPoints1D same{0.2, 0.8};
  CHECK(distance_border1d(same, same) == 0.0);
  CHECK(distance_border1d({0.05, 0.5}, {0.95, 0.5}) == doctest::Approx(0.1));
  CHECK(distance_border1d({0.0, 0.25}, {0.5, 0.75}) == doctest::Approx(1.0));
}

TEST_CASE("euler distance matches frozen examples") {
  const EulerAngles same = EulerAngles::from_angles(0.7, 1.9);
  CHECK(distance_euler(same, same) == 0.0);
  const double beta = 1.1;
  CHECK(distance_euler(EulerAngles::from_angles(0.0, beta),
                       EulerAngles::from_angles(std::numbers::pi, beta)) ==
        doctest::Approx(0.5));
  CHECK(distance_euler(EulerAngles::from_angles(0.0, 0.0),
                       EulerAngles::from_angles(std::numbers::pi,
                                                std::numbers::pi)) ==
        doctest::Approx(std::sqrt(8.0) / 4.0));
}

TEST_CASE("euler construction normalizes and rejects zero") {
  const EulerAngles e(2.0, 0.0, 0.0, -3.0);
  CHECK(e.cos_a == doctest::Approx(1.0));
  CHECK(e.sin_a == doctest::Approx(0.0));
  CHECK(e.cos_b == doctest::Approx(0.0));
  CHECK(e.sin_b == doctest::Approx(-1.0));
  CHECK_THROWS_AS(EulerAngles(0.0, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("to_cartesian matches frozen examples") {
  const CartesianPoints c =
      to_cartesian(SegmentGeometry{BorderPoints1D{0.125, 0.625}});
  CHECK(c.start.x == doctest::Approx(0.5));
  CHECK(c.start.y == doctest::Approx(0.0));
  CHECK(c.end.x == doctest::Approx(0.5));
  CHECK(c.end.y == doctest::Approx(1.0));

  const CartesianPoints id{{0.2, 0.3}, {0.9, 0.1}};
  const CartesianPoints back = to_cartesian(SegmentGeometry{id});
  CHECK(back.start == id.start);
  CHECK(back.end == id.end);

  const CartesianPoints e = to_cartesian(
      SegmentGeometry{EulerAngles::from_angles(0.0, std::numbers::pi)});
  CHECK(e.start.x == doctest::Approx(0.5));
  CHECK(e.start.y == doctest::Approx(0.0));
}

TEST_CASE("border corner ownership follows the clockwise-next side") {
  CHECK(border_position({0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(border_position({1.0, 0.0}) == doctest::Approx(0.25));
  CHECK(border_position({1.0, 1.0}) == doctest::Approx(0.5));
  CHECK(border_position({0.0, 1.0}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(border_position({0.5, 0.5}), std::invalid_argument);
  // Euler ray through a corner lands exactly on it.
  const Vec2 corner = border_point_at_angle(std::cos(std::numbers::pi / 4.0),
                                            std::sin(std::numbers::pi / 4.0));
  CHECK(corner.x == doctest::Approx(1.0));
  CHECK(corner.y == doctest::Approx(0.0));
}

TEST_CASE("to_image matches frozen examples") {
  const GridSpec s32(64, 64, 32);
  const ImageSegment a = to_image(
      SegmentGeometry{CartesianPoints{{0, 0}, {1, 1}}}, 0, 0, s32, 1.0);
  CHECK(a.start == Vec2{0, 0});
  CHECK(a.end == Vec2{32, 32});

  const GridSpec s16(64, 48, 16);
  const ImageSegment b = to_image(
      SegmentGeometry{CartesianPoints{{0.5, 0.5}, {0.5, 0.5}}}, 1, 2, s16, 1.0);
  CHECK(b.start.x == doctest::Approx(40.0));
  CHECK(b.start.y == doctest::Approx(24.0));
  CHECK(b.end.x == doctest::Approx(40.0));
  CHECK(b.end.y == doctest::Approx(24.0));

  const GridSpec s8(8, 8, 8);
  const ImageSegment c = to_image(
      SegmentGeometry{BorderPoints1D{0.125, 0.625}}, 0, 0, s8, 1.0);
  CHECK(c.start.x == doctest::Approx(4.0));
  CHECK(c.start.y == doctest::Approx(0.0));
  CHECK(c.end.x == doctest::Approx(4.0));
  CHECK(c.end.y == doctest::Approx(8.0));

  CHECK_THROWS_AS(to_image(SegmentGeometry{CartesianPoints{}}, 2, 0, s32, 1.0),
                  std::out_of_range);
  CHECK_THROWS_AS(to_image(SegmentGeometry{CartesianPoints{}}, 0, -1, s32, 1.0),
                  std::out_of_range);
}

TEST_CASE("distances are symmetric, non-negative and zero at identity") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const CartesianPoints c1{{rng.uniform(), rng.uniform()},
                             {rng.uniform(), rng.uniform()}};
    const CartesianPoints c2{{rng.uniform(), rng.uniform()},
                             {rng.uniform(), rng.uniform()}};
    const double d = distance_cartesian(c1, c2);
    CHECK(d >= 0.0);
    CHECK(d == distance_cartesian(c2, c1));
    CHECK(distance_cartesian(c1, c1) == 0.0);

    const BorderPoints1D b1{rng.uniform(), rng.uniform()};
    const BorderPoints1D b2{rng.uniform(), rng.uniform()};
    const double db = distance_border1d(b1, b2);
    CHECK(db >= 0.0);
    CHECK(db <= 1.0);
    CHECK(std::min(std::abs(b1.start - b2.start),
                   1.0 - std::abs(b1.start - b2.start)) <= 0.5);
    CHECK(db == distance_border1d(b2, b1));
    CHECK(distance_border1d(b1, b1) == 0.0);

    const EulerAngles e1 = EulerAngles::from_angles(
        rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0, 2 * std::numbers::pi));
    const EulerAngles e2 = EulerAngles::from_angles(
        rng.uniform(0, 2 * std::numbers::pi), rng.uniform(0, 2 * std::numbers::pi));
    const double de = distance_euler(e1, e2);
    CHECK(de >= 0.0);
    CHECK(de == distance_euler(e2, e1));
    CHECK(distance_euler(e1, e1) == 0.0);
  }
}

TEST_CASE("representation round-trips reproduce border endpoints") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const SegmentGeometry b = random_border_segment(rng);
    const CartesianPoints cart = to_cartesian(b);

    const BorderPoints1D b2 = to_border1d(SegmentGeometry{cart});
    const CartesianPoints cart_b = to_cartesian(SegmentGeometry{b2});
    CHECK(distance(cart.start, cart_b.start) < 1e-9);
    CHECK(distance(cart.end, cart_b.end) < 1e-9);

    const EulerAngles e = to_euler(SegmentGeometry{cart});
    const CartesianPoints cart_e = to_cartesian(SegmentGeometry{e});
    CHECK(distance(cart.start, cart_e.start) < 1e-9);
    CHECK(distance(cart.end, cart_e.end) < 1e-9);
  }
}

TEST_CASE("corner round-trips respect the ownership rule") {
  for (const double t : {0.0, 0.25, 0.5, 0.75}) {
    const BorderPoints1D b{t, 0.1};
    const BorderPoints1D back =
        to_border1d(SegmentGeometry{to_cartesian(SegmentGeometry{b})});
    CHECK(back.start == doctest::Approx(t));
  }
}

TEST_CASE("image placement commutes with representation conversion") {
  const GridSpec spec(96, 64, 32);
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const SegmentGeometry b = random_border_segment(rng);
    const int row = rng.uniform_int(0, spec.rows() - 1);
    const int col = rng.uniform_int(0, spec.cols() - 1);
    const ImageSegment direct = to_image(b, row, col, spec, 1.0);
    for (const Representation target :
         {Representation::kCartesian, Representation::kEuler}) {
      const ImageSegment via = to_image(convert(b, target), row, col, spec, 1.0);
      CHECK(distance(direct.start, via.start) < 1e-9);
      CHECK(distance(direct.end, via.end) < 1e-9);
    }
  }
}

TEST_CASE("euler distance is continuous across the border1d wrap seam") {
  const double e = 0.6;
  double prev = 1.0;
  for (double delta = 0.02; delta > 1e-6; delta *= 0.5) {
    const EulerAngles g = to_euler(SegmentGeometry{BorderPoints1D{1.0 - delta, e}});
    const EulerAngles h = to_euler(SegmentGeometry{BorderPoints1D{delta, e}});
    const double d = distance_euler(g, h);
    CHECK(d <= prev);
    prev = d;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("geometry_distance rejects representation mismatch") {
  CHECK_THROWS_AS(geometry_distance(SegmentGeometry{CartesianPoints{}},
                                    SegmentGeometry{BorderPoints1D{}}),
                  std::invalid_argument);
}
