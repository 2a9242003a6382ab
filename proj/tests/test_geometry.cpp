#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "skyhaul/geometry.hpp"

using namespace skyhaul;

TEST_CASE("normalize_angle wraps into [0, 2pi)") {
  CHECK(normalize_angle(0) == 0.0);
  CHECK(normalize_angle(kTwoPi) == 0.0);
  CHECK(normalize_angle(-kPi / 2) == Catch::Approx(3 * kPi / 2));
  CHECK(normalize_angle(5 * kTwoPi + 0.25) == Catch::Approx(0.25));
  CHECK(normalize_angle(-7 * kTwoPi - 0.25) == Catch::Approx(kTwoPi - 0.25));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    double a = normalize_angle(u(rng));
    CHECK(a >= 0.0);
    CHECK(a < kTwoPi);
  }
}

TEST_CASE("angular_distance is symmetric and at most pi") {
  CHECK(angular_distance(0, kPi) == Catch::Approx(kPi));
  CHECK(angular_distance(0.1, kTwoPi - 0.1) == Catch::Approx(0.2));
  CHECK(angular_distance(3 * kPi / 2, 0) == Catch::Approx(kPi / 2));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    double d = angular_distance(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= kPi + 1e-12);
    CHECK(d == Catch::Approx(angular_distance(b, a)));
    CHECK(angular_distance(a + kTwoPi, b) == Catch::Approx(d).margin(1e-9));
  }
}

TEST_CASE("polar and cartesian conversions round-trip") {
  PolarPos p(120, 2.1, 70);
  Vec3 c = to_cartesian(p);
  PolarPos q = from_cartesian(c.x, c.y, c.z);
  CHECK(q.r == Catch::Approx(p.r));
  CHECK(q.theta == Catch::Approx(p.theta));
  CHECK(q.altitude == p.altitude);
  CHECK(to_xy(p).x == Catch::Approx(c.x));
  CHECK(to_xy(p).y == Catch::Approx(c.y));

  // constructor normalizes theta
  PolarPos neg(50, -kPi / 2);
  CHECK(neg.theta == Catch::Approx(3 * kPi / 2));
}

TEST_CASE("planar_distance ignores altitude") {
  PolarPos a(100, 0, 0), b(100, kPi, 200);
  CHECK(planar_distance(a, b) == Catch::Approx(200));
  CHECK(planar_distance(a, a) == 0.0);
}

TEST_CASE("bearing gives the azimuth of the line of sight") {
  PolarPos origin(0, 0);
  CHECK(bearing(origin, PolarPos(10, 0)) == Catch::Approx(0));
  CHECK(bearing(origin, PolarPos(10, kPi / 2)) == Catch::Approx(kPi / 2));
  CHECK(bearing(PolarPos(10, 0), origin) == Catch::Approx(kPi));
  CHECK_THROWS_AS(bearing(origin, origin), CoincidentPositions);
}

TEST_CASE("point_segment_distance handles interior, endpoint and degenerate cases") {
  Vec2 a{0, 0}, b{10, 0};
  CHECK(point_segment_distance({5, 3}, a, b) == Catch::Approx(3));
  CHECK(point_segment_distance({-4, 3}, a, b) == Catch::Approx(5));
  CHECK(point_segment_distance({14, -3}, a, b) == Catch::Approx(5));
  CHECK(point_segment_distance({2, 7}, a, a) == Catch::Approx(std::hypot(2, 7)));
}

TEST_CASE("segments_intersect covers crossing, parallel and collinear layouts") {
  CHECK(segments_intersect({0, 0}, {10, 10}, {0, 10}, {10, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {10, 0}, {0, 1}, {10, 1}));
  CHECK(segments_intersect({0, 0}, {10, 0}, {5, 0}, {15, 0}));    // collinear overlap
  CHECK_FALSE(segments_intersect({0, 0}, {4, 0}, {5, 0}, {9, 0}));  // collinear gap
  CHECK(segments_intersect({0, 0}, {10, 0}, {10, 0}, {10, 5}));   // shared endpoint
  CHECK(segments_intersect({3, 0}, {3, 0}, {0, 0}, {10, 0}));     // point on segment
  CHECK_FALSE(segments_intersect({3, 1}, {3, 1}, {0, 0}, {10, 0}));
}

TEST_CASE("segment_segment_distance agrees with a dense sampling oracle") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    Vec2 a0{u(rng), u(rng)}, a1{u(rng), u(rng)};
    Vec2 b0{u(rng), u(rng)}, b1{u(rng), u(rng)};
    double d = segment_segment_distance(a0, a1, b0, b1);
    double sampled = std::numeric_limits<double>::infinity();
    const int n = 60;
    for (int i = 0; i <= n; ++i) {
      Vec2 p = a0 + (a1 - a0) * (static_cast<double>(i) / n);
      for (int j = 0; j <= n; ++j) {
        Vec2 q = b0 + (b1 - b0) * (static_cast<double>(j) / n);
        sampled = std::min(sampled, (p - q).norm());
      }
    }
    // sampling can only overestimate the true minimum
    CHECK(d <= sampled + 1e-9);
    CHECK(sampled <= d + 2.5);  // sampling grid resolution bound
  }
  CHECK(segment_segment_distance({0, 0}, {10, 10}, {0, 10}, {10, 0}) == 0.0);
  CHECK(segment_segment_distance({0, 0}, {10, 0}, {0, 4}, {10, 4}) == Catch::Approx(4));
}
