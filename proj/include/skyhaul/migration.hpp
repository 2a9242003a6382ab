#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skyhaul/geometry.hpp"

// Collision-free reconfiguration: bottleneck matching of old to new
// positions, straight-line travel segments, conflict coloring into altitude
// layers, and a barriered ascend / translate / descend plan.

namespace skyhaul {

struct MatchSizeMismatch : std::runtime_error {
  MatchSizeMismatch() : std::runtime_error("position sets differ in size") {}
};

struct Matching {
  std::map<std::string, std::string> assignment;  // old id -> new id
  double bottleneck = 0;                          // largest matched distance
};

// Min-max (bottleneck) matching. Edges are inserted in ascending distance
// order; after each insertion one augmenting-path search runs from the new
// edge's left endpoint. The first perfect matching is bottleneck-optimal
// because every shorter edge set was already tried.
inline Matching m2bm(const std::map<std::string, Vec2>& from,
                     const std::map<std::string, Vec2>& to) {
  if (from.size() != to.size()) throw MatchSizeMismatch();
  Matching result;
  if (from.empty()) return result;

  struct Edge {
    double dist;
    std::string a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(from.size() * to.size());
  for (const auto& [ai, ap] : from)
    for (const auto& [bi, bp] : to) edges.push_back({(ap - bp).norm(), ai, bi});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::map<std::string, std::vector<std::string>> adj;  // inserted edges, a -> bs
  std::map<std::string, std::string> match_a, match_b;
  std::function<bool(const std::string&, std::set<std::string>&)> augment =
      [&](const std::string& a, std::set<std::string>& visited) {
        for (const auto& b : adj[a]) {
          if (visited.count(b)) continue;
          visited.insert(b);
          auto mb = match_b.find(b);
          if (mb == match_b.end() || augment(mb->second, visited)) {
            match_a[a] = b;
            match_b[b] = a;
            return true;
          }
        }
        return false;
      };

  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    // one new edge grows the maximum matching by at most one; the augmenting
    // path, if any, starts at some unmatched left vertex (not necessarily e.a)
    for (const auto& [ai, ap] : from) {
      if (match_a.count(ai)) continue;
      std::set<std::string> visited;
      if (augment(ai, visited)) break;
    }
    if (match_a.size() == from.size()) {
      result.bottleneck = e.dist;
      break;
    }
  }
  for (const auto& [a, b] : match_a) result.assignment[a] = b;
  return result;
}

struct Move {
  std::string id;
  Vec3 from;
  Vec3 to;
};

// Vertices are all movers plus stationary UAVs (zero-length segments); an
// edge means the planar travel segments intersect or pass within d_min.
inline std::map<std::string, std::set<std::string>> conflict_graph(const std::vector<Move>& moves,
                                                                   double d_min) {
  std::map<std::string, std::set<std::string>> g;
  for (const auto& m : moves) g[m.id];
  for (size_t i = 0; i < moves.size(); ++i) {
    Vec2 a0{moves[i].from.x, moves[i].from.y}, a1{moves[i].to.x, moves[i].to.y};
    for (size_t j = i + 1; j < moves.size(); ++j) {
      Vec2 b0{moves[j].from.x, moves[j].from.y}, b1{moves[j].to.x, moves[j].to.y};
      if (segment_segment_distance(a0, a1, b0, b1) < d_min) {
        g[moves[i].id].insert(moves[j].id);
        g[moves[j].id].insert(moves[i].id);
      }
    }
  }
  return g;
}

namespace detail {

inline bool color_ok(const std::map<std::string, std::set<std::string>>& g,
                     const std::map<std::string, int>& colors, const std::string& v, int c) {
  for (const auto& nb : g.at(v)) {
    auto it = colors.find(nb);
    if (it != colors.end() && it->second == c) return false;
  }
  return true;
}

inline bool color_exact(const std::map<std::string, std::set<std::string>>& g,
                        const std::vector<std::string>& order, size_t idx, int k,
                        std::map<std::string, int>& colors) {
  if (idx == order.size()) return true;
  const std::string& v = order[idx];
  for (int c = 0; c < k; ++c) {
    if (!color_ok(g, colors, v, c)) continue;
    colors[v] = c;
    if (color_exact(g, order, idx + 1, k, colors)) return true;
    colors.erase(v);
  }
  return false;
}

}  // namespace detail

// Proper coloring; exact minimum for small graphs, DSATUR above. The largest
// color class is relabeled to 0 so most UAVs stay on the operating layer.
inline std::map<std::string, int> color_graph(
    const std::map<std::string, std::set<std::string>>& g) {
  std::vector<std::string> order;
  for (const auto& [v, nb] : g) order.push_back(v);
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    if (g.at(a).size() != g.at(b).size()) return g.at(a).size() > g.at(b).size();
    return a < b;
  });

  std::map<std::string, int> colors;
  if (g.size() <= 12) {
    for (int k = 1; k <= static_cast<int>(g.size()); ++k) {
      colors.clear();
      if (detail::color_exact(g, order, 0, k, colors)) break;
    }
  } else {
    // DSATUR: highest saturation first, degree then id as tie-breaks
    std::map<std::string, std::set<int>> sat;
    std::set<std::string> uncolored(order.begin(), order.end());
    while (!uncolored.empty()) {
      std::string pick;
      size_t best_sat = 0, best_deg = 0;
      for (const auto& v : uncolored) {
        size_t s = sat[v].size(), d = g.at(v).size();
        if (pick.empty() || s > best_sat || (s == best_sat && d > best_deg) ||
            (s == best_sat && d == best_deg && v < pick)) {
          pick = v;
          best_sat = s;
          best_deg = d;
        }
      }
      int c = 0;
      while (sat[pick].count(c)) ++c;
      colors[pick] = c;
      for (const auto& nb : g.at(pick)) sat[nb].insert(c);
      uncolored.erase(pick);
    }
  }

  std::map<int, int> class_size;
  for (const auto& [v, c] : colors) class_size[c]++;
  int largest = 0, largest_size = -1;
  for (const auto& [c, n] : class_size)
    if (n > largest_size) {
      largest = c;
      largest_size = n;
    }
  if (largest != 0)
    for (auto& [v, c] : colors) {
      if (c == largest) c = 0;
      else if (c == 0) c = largest;
    }
  return colors;
}

struct MigrationOptions {
  double d_min = 5.0;   // meters
  double dz = 10.0;     // layer spacing, meters
  double speed = 5.0;   // m/s, both vertical and planar
  double dt = 0.1;      // verification sampling step, seconds
};

// Altitude offset of a color layer: 0, +dz, -dz, +2dz, -2dz, ...
inline double layer_offset(int color, double dz) {
  if (color == 0) return 0;
  double mag = (color + 1) / 2 * dz;
  return color % 2 == 1 ? mag : -mag;
}

struct MigrationPlan {
  std::vector<Move> moves;
  std::map<std::string, int> colors;
  std::map<std::string, double> layer_alt;  // travel altitude per UAV
  double t_ascend = 0, t_translate = 0, t_descend = 0;

  double makespan() const { return t_ascend + t_translate + t_descend; }

  // Position at time t; each UAV flies its own leg at full speed and holds
  // at the phase barrier.
  Vec3 position_at(const Move& m, double t, double speed) const {
    double la = layer_alt.at(m.id);
    auto leg = [&](double a, double b, double tau) {
      double span = std::fabs(b - a) / speed;
      if (tau >= span || span == 0) return b;
      return a + (b - a) * (tau / span);
    };
    if (t <= t_ascend) return {m.from.x, m.from.y, leg(m.from.z, la, t)};
    if (t <= t_ascend + t_translate) {
      double tau = t - t_ascend;
      Vec2 f{m.from.x, m.from.y}, to{m.to.x, m.to.y};
      double span = (to - f).norm() / speed;
      Vec2 at = (tau >= span || span == 0) ? to : f + (to - f) * (tau / span);
      return {at.x, at.y, la};
    }
    double tau = t - t_ascend - t_translate;
    return {m.to.x, m.to.y, leg(la, m.to.z, tau)};
  }
};

inline MigrationPlan build_plan(const std::vector<Move>& moves,
                                const MigrationOptions& opt = {}) {
  MigrationPlan plan;
  plan.moves = moves;
  plan.colors = color_graph(conflict_graph(moves, opt.d_min));
  double max_up = 0, max_planar = 0, max_down = 0;
  for (const auto& m : moves) {
    double la = m.from.z + layer_offset(plan.colors.at(m.id), opt.dz);
    plan.layer_alt[m.id] = la;
    max_up = std::max(max_up, std::fabs(la - m.from.z));
    max_planar = std::max(max_planar, std::hypot(m.to.x - m.from.x, m.to.y - m.from.y));
    max_down = std::max(max_down, std::fabs(m.to.z - la));
  }
  plan.t_ascend = max_up / opt.speed;
  plan.t_translate = max_planar / opt.speed;
  plan.t_descend = max_down / opt.speed;
  return plan;
}

// Samples every UAV's 3-D position through the plan and checks pairwise
// separation; start and end states must already be separated.
inline bool verify_plan(const MigrationPlan& plan, const MigrationOptions& opt = {}) {
  double T = plan.makespan();
  int steps = static_cast<int>(std::ceil(T / opt.dt));
  const double eps = 1e-9;
  for (int s = 0; s <= steps; ++s) {
    double t = std::min(T, s * opt.dt);
    for (size_t i = 0; i < plan.moves.size(); ++i) {
      Vec3 a = plan.position_at(plan.moves[i], t, opt.speed);
      for (size_t j = i + 1; j < plan.moves.size(); ++j) {
        Vec3 b = plan.position_at(plan.moves[j], t, opt.speed);
        double d = std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                             (a.z - b.z) * (a.z - b.z));
        if (d + eps < opt.d_min) return false;
      }
    }
  }
  return true;
}

}  // namespace skyhaul
