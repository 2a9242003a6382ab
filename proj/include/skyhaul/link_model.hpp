#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "skyhaul/geometry.hpp"
#include "skyhaul/types.hpp"

namespace skyhaul {

struct NonPositiveDistance : std::runtime_error {
  NonPositiveDistance() : std::runtime_error("non-positive link distance") {}
};
struct DemandUnsatisfiableAtAnyRange : std::runtime_error {
  DemandUnsatisfiableAtAnyRange() : std::runtime_error("demand unsatisfiable at any range") {}
};
struct SingularDesign : std::runtime_error {
  SingularDesign() : std::runtime_error("rank-deficient regression design") {}
};

// Coefficients of the capacity surface
//   C(D, dphi) = a*D^2 + b*dphi^2 + c*dphi*D + d*D + e*dphi + f   [Mbps]
// with D in meters and dphi (combined boresight misalignment) in radians.
// Evaluation is clamped to [0, rate_cap] and cut off past max_fov.
struct LinkModelParams {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;
  double conn_threshold = 100.0;  // Mbps
  double rate_cap = 2310.0;       // Mbps (MCS 8)
  double max_fov = 0;             // radians; capacity is 0 beyond this misalignment
};

struct AnchorSample {
  double distance = 0;    // meters, > 0
  double dphi = 0;        // radians
  double throughput = 0;  // Mbps
  double weight = 1.0;
};

inline double capacity(double distance, double dphi, const LinkModelParams& p) {
  if (distance <= 0) throw NonPositiveDistance();
  double phi = std::fabs(dphi);
  if (phi > p.max_fov) return 0.0;
  double v = p.a * distance * distance + p.b * phi * phi + p.c * phi * distance +
             p.d * distance + p.e * phi + p.f;
  if (v < 0) return 0.0;
  return v > p.rate_cap ? p.rate_cap : v;
}

// Index of the radio whose sector [boresight - pi/M, boresight + pi/M)
// contains target_bearing.
inline int serving_radio(const UavState& u, double target_bearing) {
  int m = u.num_radios;
  double w = kTwoPi / m;
  double rel = normalize_angle(target_bearing - u.yaw);
  int idx = static_cast<int>(std::floor((rel + w / 2) / w));
  return idx % m;
}

inline double boresight(const UavState& u, int radio) {
  return normalize_angle(u.yaw + radio * kTwoPi / u.num_radios);
}

// Misalignment of u's serving radio with respect to the line of sight to v.
inline double misalignment(const UavState& u, double target_bearing) {
  return angular_distance(boresight(u, serving_radio(u, target_bearing)), target_bearing);
}

// Expected link throughput between two UAVs. The effective dphi is the sum
// of the per-end boresight misalignments, which reduces to the measured
// one-ended cases when the other end is held at 0 degrees.
inline double link_capacity(const UavState& u, const UavState& v, const LinkModelParams& p) {
  double dist = planar_distance(u.pos, v.pos);
  if (dist <= 0) throw CoincidentPositions();
  double buv = bearing(u.pos, v.pos);
  double bvu = normalize_angle(buv + kPi);
  double dphi = misalignment(u, buv) + misalignment(v, bvu);
  return capacity(dist, dphi, p);
}

inline bool is_connected(const UavState& u, const UavState& v, const LinkModelParams& p) {
  return link_capacity(u, v, p) >= p.conn_threshold;
}

// Largest D > 0 with capacity(D, dphi) >= T, from the larger real root of the
// quadratic in D.
inline double max_range(double T, double dphi, const LinkModelParams& p) {
  if (T <= 0 || T > p.rate_cap) throw DemandUnsatisfiableAtAnyRange();
  double phi = std::fabs(dphi);
  if (phi > p.max_fov) throw DemandUnsatisfiableAtAnyRange();
  // a*D^2 + (d + c*phi)*D + (b*phi^2 + e*phi + f - T) >= 0
  double A = p.a;
  double B = p.d + p.c * phi;
  double C = p.b * phi * phi + p.e * phi + p.f - T;
  if (C < 0) throw DemandUnsatisfiableAtAnyRange();  // fails even as D -> 0+
  if (A == 0) {
    if (B >= 0) return std::numeric_limits<double>::infinity();
    return C / -B;
  }
  double disc = B * B - 4 * A * C;
  if (A < 0) {
    // concave: capacity >= T between the roots; C >= 0 guarantees real roots
    return (-B - std::sqrt(disc)) / (2 * A);
  }
  // convex and C >= 0: either always >= T or recovers past the larger root
  if (disc < 0 || -B / (2 * A) < 0) return std::numeric_limits<double>::infinity();
  double lo = (-B - std::sqrt(disc)) / (2 * A);
  return lo > 0 ? lo : std::numeric_limits<double>::infinity();
}

// Weighted least squares on the 6-term design (D^2, phi^2, phi*D, D, phi, 1),
// solved via normal equations.
inline LinkModelParams fit_params(const std::vector<AnchorSample>& samples,
                                  double conn_threshold = 100.0, double rate_cap = 2310.0,
                                  double max_fov = 0) {
  if (samples.size() < 6) throw SingularDesign();
  std::array<std::array<double, 7>, 6> m{};  // augmented normal equations
  for (const auto& s : samples) {
    std::array<double, 6> row = {s.distance * s.distance, s.dphi * s.dphi,
                                 s.dphi * s.distance, s.distance, s.dphi, 1.0};
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) m[i][j] += s.weight * row[i] * row[j];
      m[i][6] += s.weight * row[i] * s.throughput;
    }
  }
  // Gaussian elimination, partial pivoting
  for (int col = 0; col < 6; ++col) {
    int piv = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (std::fabs(m[piv][col]) < 1e-9 * (1.0 + std::fabs(m[col][col]))) throw SingularDesign();
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      double factor = m[r][col] / m[col][col];
      for (int j = col; j < 7; ++j) m[r][j] -= factor * m[col][j];
    }
  }
  LinkModelParams p;
  p.a = m[0][6] / m[0][0];
  p.b = m[1][6] / m[1][1];
  p.c = m[2][6] / m[2][2];
  p.d = m[3][6] / m[3][3];
  p.e = m[4][6] / m[4][4];
  p.f = m[5][6] / m[5][5];
  p.conn_threshold = conn_threshold;
  p.rate_cap = rate_cap;
  p.max_fov = max_fov > 0 ? max_fov : 82.0 * kPi / 180.0;
  return p;
}

// Bundled anchor table. Built from the measurement boundary facts: 2310 Mbps
// peak at 40 m aligned, the 100 Mbps connectivity edge at (80 m, 80 deg) and
// (240 m, 20 deg), and a monotone decline from 40 to 400 m when aligned. The
// interior grid points interpolate those anchors on a single quadratic
// surface so the fit is exact.
inline const std::vector<AnchorSample>& default_anchor_table() {
  static const std::vector<AnchorSample> table = [] {
    const double deg = kPi / 180.0;
    std::vector<std::array<double, 3>> pts = {
        {40, 0, 2310.0},     {40, 20, 2088.068182}, {40, 40, 1801.5},
        {40, 60, 1450.295455}, {40, 80, 1034.454545}, {80, 0, 2134.0},
        {80, 20, 1722.454545}, {80, 40, 1246.272727}, {80, 60, 705.454545},
        {80, 80, 100.0},     {120, 0, 1942.0},      {120, 20, 1340.840909},
        {120, 40, 675.045455}, {160, 0, 1734.0},    {160, 20, 943.227273},
        {160, 40, 87.818182},  {200, 0, 1510.0},    {200, 20, 529.613636},
        {240, 0, 1270.0},    {240, 20, 100.0},      {280, 0, 1014.0},
        {320, 0, 742.0},     {360, 0, 454.0},       {400, 0, 150.0},
    };
    std::vector<AnchorSample> t;
    t.reserve(pts.size());
    for (auto& q : pts) t.push_back({q[0], q[1] * deg, q[2], 1.0});
    return t;
  }();
  return table;
}

inline const LinkModelParams& default_params() {
  static const LinkModelParams p = fit_params(default_anchor_table());
  return p;
}

// Per-link misalignment that a straight relay chain cannot avoid: neighbors
// sit at bearings pi apart while boresights come in 2*pi/M steps. Zero for
// even M; pi/3 for M=3.
inline double chain_misalign(int num_radios) {
  double best = kPi;
  for (int k = 0; k <= num_radios; ++k)
    best = std::fmin(best, std::fabs(k * kTwoPi / num_radios - kPi));
  return best;
}

}  // namespace skyhaul
