#pragma once

#include <cmath>
#include <stdexcept>

namespace skyhaul {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

struct CoincidentPositions : std::runtime_error {
  CoincidentPositions() : std::runtime_error("coincident positions") {}
};

// Wrap an angle into [0, 2*pi).
inline double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  if (a >= kTwoPi) a = 0;  // fmod can round up to 2*pi
  return a;
}

// Minimal absolute separation between two angles, in [0, pi].
inline double angular_distance(double a, double b) {
  double d = std::fabs(normalize_angle(a) - normalize_angle(b));
  return d > kPi ? kTwoPi - d : d;
}

// Planar position in polar coordinates about the world origin.
// The active ground-station UAV sits at the origin of its own frame.
struct PolarPos {
  double r = 0;         // meters, >= 0
  double theta = 0;     // radians in [0, 2*pi)
  double altitude = 0;  // meters

  PolarPos() = default;
  PolarPos(double r_, double theta_, double alt_ = 0)
      : r(r_), theta(normalize_angle(theta_)), altitude(alt_) {}
};

struct Vec2 {
  double x = 0, y = 0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

inline Vec3 to_cartesian(const PolarPos& p) {
  return {p.r * std::cos(p.theta), p.r * std::sin(p.theta), p.altitude};
}

inline Vec2 to_xy(const PolarPos& p) {
  return {p.r * std::cos(p.theta), p.r * std::sin(p.theta)};
}

inline PolarPos from_cartesian(double x, double y, double alt = 0) {
  double r = std::hypot(x, y);
  double th = r > 0 ? std::atan2(y, x) : 0.0;
  return PolarPos(r, th, alt);
}

inline double planar_distance(const PolarPos& a, const PolarPos& b) {
  return (to_xy(a) - to_xy(b)).norm();
}

// Azimuth of the line of sight from `from` to `to`, in [0, 2*pi).
inline double bearing(const PolarPos& from, const PolarPos& to) {
  Vec2 d = to_xy(to) - to_xy(from);
  if (d.norm() == 0) throw CoincidentPositions();
  return normalize_angle(std::atan2(d.y, d.x));
}

// Minimum distance between segments [a0,a1] and [b0,b1] in the plane.
// Degenerate (zero-length) segments reduce to points.
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 == 0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::fmax(0.0, std::fmin(1.0, t));
  return (p - (a + ab * t)).norm();
}

inline bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x * v.y - u.y * v.x; };
  Vec2 r = a1 - a0, s = b1 - b0;
  double rxs = cross(r, s);
  Vec2 qp = b0 - a0;
  if (rxs == 0) {
    // parallel, non-collinear; both tests needed when one segment degenerates
    if (cross(qp, r) != 0 || cross(qp, s) != 0) return false;
    // collinear: check 1-D overlap
    double rr = r.dot(r);
    if (rr == 0) {
      double ss = s.dot(s);
      if (ss == 0) return (b0 - a0).norm() == 0;
      double u0 = (a0 - b0).dot(s) / ss;
      return u0 >= 0 && u0 <= 1;
    }
    double t0 = qp.dot(r) / rr;
    double t1 = (b1 - a0).dot(r) / rr;
    if (t0 > t1) std::swap(t0, t1);
    return t1 >= 0 && t0 <= 1;
  }
  double t = cross(qp, s) / rxs;
  double u = cross(qp, r) / rxs;
  return t >= 0 && t <= 1 && u >= 0 && u <= 1;
}

inline double segment_segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  double d = point_segment_distance(a0, b0, b1);
  d = std::fmin(d, point_segment_distance(a1, b0, b1));
  d = std::fmin(d, point_segment_distance(b0, a0, a1));
  d = std::fmin(d, point_segment_distance(b1, a0, a1));
  return d;
}

}  // namespace skyhaul
