#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skyhaul/link_model.hpp"
#include "skyhaul/routing_eval.hpp"
#include "skyhaul/types.hpp"

// Joint deployment, connectivity and routing: radial per-session optimization
// under a swept GS yaw, then pairwise relay contraction across sessions.

namespace skyhaul {

struct PlannerOptions {
  double phi_grid_step = kPi / 180.0;     // GS yaw sweep over [0, 2*pi/M)
  double orient_grid_step = kPi / 180.0;  // orientation sweep resolution
  double lambda_target = 1.0;
  int max_contraction_passes = 10000;
  double tolerance = 1e-6;
  int relay_radios = 3;
};

struct NeighborLink {
  PolarPos pos;
  double yaw = 0;
  int num_radios = 1;
  double demand = 0;  // Mbps routed on the link to this neighbor
};

struct OrientResult {
  double phi = 0;         // chosen yaw in [0, 2*pi/M)
  double lambda_min = 0;  // min over non-empty sectors of the per-sector LP optimum
};

struct NoOrientation : std::runtime_error {
  NoOrientation() : std::runtime_error("no orientation connects all neighbors") {}
};

// Sweeps the UAV's yaw on a grid; for each yaw the per-sector problem is a
// single-constraint LP whose optimum is lambda* = 1 / sum_b(T_b / Cap_b).
// Ties break toward smaller phi.
inline OrientResult solve_orient(const PolarPos& pos, int num_radios,
                                 const std::vector<NeighborLink>& neighbors,
                                 const LinkModelParams& p, const PlannerOptions& opt) {
  struct Pre {
    double dist, bearing_from_l, far_misalign, demand;
  };
  std::vector<Pre> pre;
  pre.reserve(neighbors.size());
  for (const auto& b : neighbors) {
    double dist = planar_distance(pos, b.pos);
    double bl = bearing(pos, b.pos);
    UavState bs;
    bs.pos = b.pos;
    bs.yaw = b.yaw;
    bs.num_radios = b.num_radios;
    double back = normalize_angle(bl + kPi);
    pre.push_back({dist, bl, misalignment(bs, back), b.demand});
  }
  double wedge = kTwoPi / num_radios;
  int steps = std::max(1, static_cast<int>(std::ceil(wedge / opt.orient_grid_step)));
  double best_lambda = -1, best_phi = 0;
  std::vector<double> load(num_radios);
  for (int s = 0; s < steps; ++s) {
    double phi = s * opt.orient_grid_step;
    if (phi >= wedge) break;
    std::fill(load.begin(), load.end(), 0.0);
    bool dead = false;
    for (const auto& b : pre) {
      double rel = normalize_angle(b.bearing_from_l - phi);
      int m = static_cast<int>(std::floor((rel + wedge / 2) / wedge)) % num_radios;
      double a_l = angular_distance(normalize_angle(phi + m * wedge), b.bearing_from_l);
      double cap = capacity(b.dist, a_l + b.far_misalign, p);
      if (cap <= 0) {
        dead = true;
        break;
      }
      load[m] += b.demand / cap;
    }
    if (dead) continue;
    double lam = std::numeric_limits<double>::infinity();
    for (double l : load)
      if (l > 0) lam = std::min(lam, 1.0 / l);
    if (lam > best_lambda) {
      best_lambda = lam;
      best_phi = phi;
    }
  }
  if (best_lambda <= 0) throw NoOrientation();
  return {best_phi, best_lambda};
}

struct SectorSession {
  std::string id;
  double r = 0;           // distance app -> GS
  double theta = 0;       // ray bearing from GS toward the app
  double demand = 0;      // Mbps
  double gs_misalign = 0; // GS serving-radio misalignment toward the ray
};

struct DeploySolution {
  std::map<std::string, int> hops;  // N_k = ceil(r_k / h_k); relays = N_k - 1
  double gs_load = 0;               // sum of GS-radio shares
  bool feasible = false;
};

namespace detail {

// First-hop (GS side) capacity for session k at hop count N. Interior chain
// links pay the unavoidable straight-chain misalignment of the relay radios.
inline double gs_hop_capacity(const SectorSession& k, int hops, double chain_mis,
                              const LinkModelParams& p) {
  double h = k.r / hops;
  double dphi = k.gs_misalign + (hops > 1 ? chain_mis / 2 : 0.0);
  return capacity(h, dphi, p);
}

inline bool hops_feasible(const SectorSession& k, int hops, double chain_mis,
                          const LinkModelParams& p) {
  double h = k.r / hops;
  if (hops > 1 && capacity(h, chain_mis, p) < k.demand) return false;
  return gs_hop_capacity(k, hops, chain_mis, p) >= k.demand;
}

}  // namespace detail

// Minimize sum_k ceil(r_k/h_k) subject to per-hop capacity >= T_k and a
// feasible time sharing of the sector's GS radio. Solved on integer hop
// counts: start each session at its minimum and greedily spend extra hops
// where they buy the biggest reduction in GS-radio load.
inline DeploySolution init_deploy(const std::vector<SectorSession>& sessions, int relay_radios,
                                  const LinkModelParams& p, const PlannerOptions& opt,
                                  bool best_effort = false) {
  DeploySolution sol;
  double chain = chain_misalign(relay_radios);
  std::map<std::string, int> max_hops;
  for (const auto& k : sessions) {
    if (k.r <= opt.tolerance) continue;  // served by the GS downward radio
    int cap_n = std::max(1, static_cast<int>(std::ceil(k.r / 2.0)));  // hops >= 2 m
    int n = -1;
    for (int trial = 1; trial <= cap_n; ++trial) {
      if (detail::hops_feasible(k, trial, chain, p)) {
        n = trial;
        break;
      }
    }
    if (n < 0) {
      if (!best_effort) throw InfeasibleError("session " + k.id + " unsatisfiable at any hop count");
      n = cap_n;
    }
    sol.hops[k.id] = n;
    max_hops[k.id] = cap_n;
  }
  auto load_of = [&](const SectorSession& k, int n) {
    double cap = detail::gs_hop_capacity(k, n, chain, p);
    return cap > 0 ? k.demand / cap : std::numeric_limits<double>::infinity();
  };
  auto total_load = [&] {
    double t = 0;
    for (const auto& k : sessions)
      if (sol.hops.count(k.id)) t += load_of(k, sol.hops.at(k.id));
    return t;
  };
  double load = total_load();
  while (load > 1.0 + opt.tolerance) {
    // jump to any higher hop count: the load curve is not monotone in N
    // (the chain misalignment kicks in at N = 2), so single steps can stall
    const SectorSession* best = nullptr;
    int best_n = 0;
    double best_rate = 0, best_gain = 0;
    for (const auto& k : sessions) {
      auto it = sol.hops.find(k.id);
      if (it == sol.hops.end()) continue;
      int cur = it->second;
      double cur_load = load_of(k, cur);
      for (int n = cur + 1; n <= max_hops.at(k.id); ++n) {
        if (!detail::hops_feasible(k, n, chain, p)) continue;
        double gain = cur_load - load_of(k, n);
        if (gain <= 1e-15) continue;
        double rate = gain / (n - cur);
        if (rate > best_rate + 1e-15) {
          best_rate = rate;
          best_gain = gain;
          best_n = n;
          best = &k;
        }
      }
    }
    if (!best) {
      if (!best_effort) throw InfeasibleError("GS radio over-subscribed");
      break;
    }
    load -= best_gain;
    sol.hops[best->id] = best_n;
  }
  sol.gs_load = total_load();
  sol.feasible = sol.gs_load <= 1.0 + opt.tolerance;
  return sol;
}

namespace detail {

struct RadialInput {
  UavState gs;
  std::vector<UavState> apps;       // matched 1:1 with sessions by app_uav id
  std::vector<Session> sessions;
};

inline const UavState& app_of(const RadialInput& in, const Session& s) {
  for (const auto& a : in.apps)
    if (a.id == s.app_uav) return a;
  throw std::out_of_range("no app UAV " + s.app_uav);
}

inline std::vector<SectorSession> sector_view(const RadialInput& in, double phi,
                                              std::vector<int>* sector_out = nullptr) {
  std::vector<SectorSession> out;
  UavState gs = in.gs;
  gs.yaw = phi;
  for (const auto& s : in.sessions) {
    const UavState& app = app_of(in, s);
    double r = planar_distance(gs.pos, app.pos);
    SectorSession ss;
    ss.id = s.id;
    ss.r = r;
    ss.demand = s.demand;
    if (r > 1e-9) {
      ss.theta = bearing(gs.pos, app.pos);
      int m = serving_radio(gs, ss.theta);
      ss.gs_misalign = angular_distance(boresight(gs, m), ss.theta);
      if (sector_out) sector_out->push_back(m);
    } else if (sector_out) {
      sector_out->push_back(-1);
    }
    out.push_back(ss);
  }
  return out;
}

// Total hop count of the radial deployment for a fixed GS yaw (the quantity
// minimized by the yaw sweep); infinity when infeasible.
inline double radial_cost(const RadialInput& in, double phi, const LinkModelParams& p,
                          const PlannerOptions& opt) {
  std::vector<int> sectors;
  auto view = sector_view(in, phi, &sectors);
  std::map<int, std::vector<SectorSession>> by_sector;
  for (size_t i = 0; i < view.size(); ++i)
    if (sectors[i] >= 0) by_sector[sectors[i]].push_back(view[i]);
  double total = 0;
  for (auto& [m, ss] : by_sector) {
    try {
      auto sol = init_deploy(ss, opt.relay_radios, p, opt);
      for (auto& [id, n] : sol.hops) total += n;
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return total;
}

inline NetworkConfig build_radial_config(const RadialInput& in, double phi,
                                         const LinkModelParams& p, const PlannerOptions& opt,
                                         bool best_effort) {
  std::vector<int> sectors;
  auto view = sector_view(in, phi, &sectors);
  std::map<int, std::vector<SectorSession>> by_sector;
  for (size_t i = 0; i < view.size(); ++i)
    if (sectors[i] >= 0) by_sector[sectors[i]].push_back(view[i]);

  std::map<std::string, int> hops;
  for (auto& [m, ss] : by_sector) {
    auto sol = init_deploy(ss, opt.relay_radios, p, opt, best_effort);
    for (auto& [id, n] : sol.hops) hops[id] = n;
  }

  NetworkConfig cfg;
  UavState gs = in.gs;
  gs.yaw = phi;
  cfg.uavs[gs.id] = gs;
  double chain = chain_misalign(opt.relay_radios);
  Vec2 gs_xy = to_xy(gs.pos);
  for (const auto& s : in.sessions) {
    UavState app = app_of(in, s);
    std::vector<std::string> path{app.id};
    auto hit = hops.find(s.id);
    if (hit != hops.end()) {
      double r = planar_distance(gs.pos, app.pos);
      double theta = bearing(gs.pos, app.pos);
      double h = r / hit->second;
      Vec2 dir{std::cos(theta), std::sin(theta)};
      for (int i = hit->second - 1; i >= 1; --i) {
        UavState relay;
        relay.id = "r-" + s.id + "-" + std::to_string(i);
        relay.role = Role::Relay;
        Vec2 xy = gs_xy + dir * (i * h);
        relay.pos = from_cartesian(xy.x, xy.y, gs.pos.altitude);
        relay.yaw = normalize_angle(theta + chain / 2);
        relay.num_radios = opt.relay_radios;
        cfg.uavs[relay.id] = relay;
        path.push_back(relay.id);
      }
      app.yaw = normalize_angle(theta + kPi);  // face the next hop toward the GS
    }
    cfg.uavs[app.id] = app;
    path.push_back(gs.id);
    cfg.routes[s.id] = path;
  }
  return cfg;
}

}  // namespace detail

// Radial optimization per session: sweep the GS yaw over [0, 2*pi/M), place
// per-session relay chains with equal hop spacing on the GS->app ray, and
// keep the yaw with the fewest UAVs (ties toward smaller phi).
inline NetworkConfig radial_optimize(const std::vector<UavState>& apps,
                                     const std::vector<Session>& sessions, const UavState& gs,
                                     const LinkModelParams& p, const PlannerOptions& opt,
                                     bool best_effort = false) {
  detail::RadialInput in{gs, apps, sessions};
  double wedge = kTwoPi / std::max(1, gs.num_radios);
  double best_cost = std::numeric_limits<double>::infinity();
  double best_phi = 0;
  for (double phi = 0; phi < wedge - 1e-12; phi += opt.phi_grid_step) {
    double cost = detail::radial_cost(in, phi, p, opt);
    if (cost < best_cost) {
      best_cost = cost;
      best_phi = phi;
    }
  }
  if (!std::isfinite(best_cost) && !best_effort)
    throw InfeasibleError("no GS yaw admits a feasible radial deployment");
  auto cfg = detail::build_radial_config(in, best_phi, p, opt, best_effort);
  max_satisfaction(cfg, sessions, p, /*strict=*/false);  // assign shares
  return cfg;
}

namespace detail {

struct Disk {
  Vec2 center;
  double radius;
};

inline bool inside_all(const Vec2& pt, const std::vector<Disk>& disks, double slack = 1e-6) {
  for (const auto& d : disks)
    if ((pt - d.center).norm() > d.radius + slack) return false;
  return true;
}

inline std::vector<Vec2> circle_intersections(const Disk& a, const Disk& b) {
  Vec2 ab = b.center - a.center;
  double d = ab.norm();
  if (d == 0 || d > a.radius + b.radius || d < std::fabs(a.radius - b.radius)) return {};
  double x = (d * d + a.radius * a.radius - b.radius * b.radius) / (2 * d);
  double y2 = a.radius * a.radius - x * x;
  if (y2 < 0) y2 = 0;
  double y = std::sqrt(y2);
  Vec2 u = ab * (1.0 / d);
  Vec2 n{-u.y, u.x};
  Vec2 base = a.center + u * x;
  if (y == 0) return {base};
  return {base + n * y, base - n * y};
}

// Neighbor disks for contracting the pair (i, j): one disk per neighbor
// carrying the traffic routed on the corresponding link, radius from the
// perfect-orientation inverse range. Empty optional when some link demand
// exceeds the rate cap.
inline std::optional<std::vector<Disk>> neighbor_disks(const std::string& i, const std::string& j,
                                                       const NetworkConfig& cfg,
                                                       const std::vector<Session>& sessions,
                                                       const LinkModelParams& p,
                                                       double misalign_allowance = 0) {
  std::map<std::string, double> link_traffic;  // neighbor id -> Mbps via i or j
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    const auto& path = rit->second;
    for (size_t k = 0; k < path.size(); ++k) {
      if (path[k] != i && path[k] != j) continue;
      if (k > 0) link_traffic[path[k - 1]] += s.demand;
      if (k + 1 < path.size()) link_traffic[path[k + 1]] += s.demand;
    }
  }
  std::vector<Disk> disks;
  for (const auto& [nb, traffic] : link_traffic) {
    double radius;
    try {
      radius = max_range(traffic, misalign_allowance, p);
    } catch (const DemandUnsatisfiableAtAnyRange&) {
      if (misalign_allowance == 0) return std::nullopt;
      try {
        radius = max_range(traffic, 0, p);
      } catch (const DemandUnsatisfiableAtAnyRange&) {
        return std::nullopt;
      }
    }
    disks.push_back({to_xy(cfg.uav(nb).pos), radius});
  }
  return disks;
}

inline std::vector<Vec2> region_corners(const std::vector<Disk>& disks) {
  std::vector<Vec2> corners;
  for (size_t a = 0; a < disks.size(); ++a)
    for (size_t b = a + 1; b < disks.size(); ++b)
      for (const Vec2& pt : circle_intersections(disks[a], disks[b]))
        if (inside_all(pt, disks)) corners.push_back(pt);
  return corners;
}

// Corner points of the disk-intersection region plus its centroid; a single
// center point when one disk is nested inside all others; empty when the
// intersection is empty.
inline std::vector<Vec2> region_candidates(const std::vector<Disk>& disks) {
  if (disks.empty()) return {};
  auto corners = region_corners(disks);
  if (corners.empty()) {
    // no pairwise crossings: region is non-empty only if the smallest disk
    // lies inside every other
    size_t smallest = 0;
    for (size_t k = 1; k < disks.size(); ++k)
      if (disks[k].radius < disks[smallest].radius) smallest = k;
    for (size_t k = 0; k < disks.size(); ++k) {
      double d = (disks[k].center - disks[smallest].center).norm();
      if (d + disks[smallest].radius > disks[k].radius + 1e-6) return {};
    }
    return {disks[smallest].center};
  }
  Vec2 centroid{0, 0};
  for (const auto& c : corners) centroid = centroid + c;
  centroid = centroid * (1.0 / corners.size());
  corners.push_back(centroid);
  return corners;
}

}  // namespace detail

// Corner points of the disk-intersection region plus its centroid; empty when
// the intersection is empty.
inline std::vector<Vec2> contract_points(const std::string& i, const std::string& j,
                                         const NetworkConfig& cfg,
                                         const std::vector<Session>& sessions,
                                         const LinkModelParams& p) {
  auto disks = detail::neighbor_disks(i, j, cfg, sessions, p);
  if (!disks) return {};
  return detail::region_candidates(*disks);
}

namespace detail {

// Boundary points of the contraction region farthest from each GS. The
// corner/centroid set can miss the feasible band when the region is long and
// hugs the GS; the farthest boundary point is also the one the contraction
// step prefers (farthest from the GS, closest to the app UAVs).
inline std::vector<Vec2> far_points(const std::vector<Disk>& disks,
                                    const std::vector<Vec2>& gs_positions) {
  std::vector<Vec2> out;
  Vec2 centroid{0, 0};
  for (const auto& d : disks) centroid = centroid + d.center;
  centroid = centroid * (1.0 / disks.size());
  for (const auto& gs : gs_positions) {
    for (const auto& d : disks) {
      Vec2 v = d.center - gs;
      if (v.norm() < 1e-9) v = centroid - d.center;  // the GS's own disk: head for the others
      if (v.norm() < 1e-9) v = {1, 0};
      Vec2 pt = d.center + v * (d.radius / v.norm());
      if (inside_all(pt, disks)) out.push_back(pt);
    }
  }
  return out;
}

inline std::vector<std::string> sessions_through(const NetworkConfig& cfg,
                                                 const std::vector<Session>& sessions,
                                                 const std::string& uav) {
  std::vector<std::string> out;
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    for (const auto& hop : rit->second)
      if (hop == uav) {
        out.push_back(s.id);
        break;
      }
  }
  return out;
}

inline std::vector<NeighborLink> links_of(const NetworkConfig& cfg,
                                          const std::vector<Session>& sessions,
                                          const std::string& uav) {
  std::map<std::string, double> traffic;
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    const auto& path = rit->second;
    for (size_t k = 0; k < path.size(); ++k) {
      if (path[k] != uav) continue;
      if (k > 0) traffic[path[k - 1]] += s.demand;
      if (k + 1 < path.size()) traffic[path[k + 1]] += s.demand;
    }
  }
  std::vector<NeighborLink> out;
  for (const auto& [nb, t] : traffic) {
    const UavState& b = cfg.uav(nb);
    out.push_back({b.pos, b.yaw, b.num_radios, t});
  }
  return out;
}

// Re-orient every UAV that carries traffic, GS first then outward by radius.
// Throws NoOrientation when a UAV cannot reach all of its neighbors.
inline void reorient_carriers(NetworkConfig& cfg, const std::vector<Session>& sessions,
                              const std::set<std::string>& only, const LinkModelParams& p,
                              const PlannerOptions& opt) {
  std::vector<const UavState*> order;
  for (const auto& [id, u] : cfg.uavs)
    if (only.empty() || only.count(id)) order.push_back(&u);
  std::sort(order.begin(), order.end(), [](const UavState* a, const UavState* b) {
    bool ga = a->role == Role::GroundStation, gb = b->role == Role::GroundStation;
    if (ga != gb) return ga;
    if (a->pos.r != b->pos.r) return a->pos.r < b->pos.r;
    return a->id < b->id;
  });
  // two passes: the first may see stale neighbor yaws, the second refines
  // with everyone updated and is strict
  for (int pass = 0; pass < 2; ++pass) {
    for (const UavState* u : order) {
      auto links = links_of(cfg, sessions, u->id);
      if (links.empty()) continue;
      try {
        cfg.uavs[u->id].yaw = solve_orient(u->pos, u->num_radios, links, p, opt).phi;
      } catch (const NoOrientation&) {
        if (pass == 1) throw;
      }
    }
  }
}

struct ContractionState {
  int next_id = 0;
  std::set<std::pair<std::string, std::string>> dead;
};

// Try to contract the relay pair (i, j) into one relay. On success the config
// is replaced and true returned. Feasibility is decided by the full referee:
// the candidate is accepted only if the re-evaluated configuration still
// meets the lambda target.
inline bool try_contract(NetworkConfig& cfg, const std::vector<Session>& sessions,
                         const std::string& i, const std::string& j,
                         const std::vector<Vec2>& gs_positions, const LinkModelParams& p,
                         const PlannerOptions& opt, ContractionState& st) {
  // candidate disks shrink by a yaw-grid misalignment allowance at each end
  auto disks = neighbor_disks(i, j, cfg, sessions, p, 2 * opt.orient_grid_step);
  if (!disks || disks->empty()) return false;
  for (size_t a = 0; a < disks->size(); ++a)
    for (size_t b = a + 1; b < disks->size(); ++b)
      if (((*disks)[a].center - (*disks)[b].center).norm() >
          (*disks)[a].radius + (*disks)[b].radius)
        return false;

  std::vector<Vec2> candidates = region_candidates(*disks);
  for (const Vec2& fp : far_points(*disks, gs_positions)) candidates.push_back(fp);
  if (candidates.empty()) return false;

  // app UAVs of the merged sessions, for the tie-break metric
  std::vector<Vec2> app_xy;
  std::set<std::string> merged;
  for (const auto& sid : sessions_through(cfg, sessions, i)) merged.insert(sid);
  for (const auto& sid : sessions_through(cfg, sessions, j)) merged.insert(sid);
  for (const auto& s : sessions)
    if (merged.count(s.id)) app_xy.push_back(to_xy(cfg.uav(s.app_uav).pos));

  auto metric = [&](const Vec2& pt) {
    double sum = 0;
    for (const auto& a : app_xy) {
      double d = (a - pt).norm();
      sum += d * d;
    }
    return std::sqrt(sum);
  };
  std::sort(candidates.begin(), candidates.end(), [&](const Vec2& a, const Vec2& b) {
    double ma = metric(a), mb = metric(b);
    if (ma != mb) return ma < mb;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });

  const int neighbor_radios = opt.relay_radios;
  for (const Vec2& pt : candidates) {
    NetworkConfig trial = cfg;
    UavState merged_relay;
    merged_relay.id = "c-" + std::to_string(st.next_id);
    merged_relay.role = Role::Relay;
    merged_relay.pos = from_cartesian(pt.x, pt.y, cfg.uav(i).pos.altitude);
    merged_relay.num_radios = neighbor_radios;
    if (!gs_positions.empty()) {
      Vec2 g = gs_positions.front() - pt;
      if (g.norm() > 1e-9) merged_relay.yaw = normalize_angle(std::atan2(g.y, g.x));
    }
    trial.uavs.erase(i);
    trial.uavs.erase(j);
    trial.uavs[merged_relay.id] = merged_relay;
    bool route_ok = true;
    for (auto& [sid, path] : trial.routes) {
      for (auto& hop : path)
        if (hop == i || hop == j) hop = merged_relay.id;
      std::set<std::string> uniq(path.begin(), path.end());
      if (uniq.size() != path.size()) route_ok = false;
      for (const auto& hop : path)
        if (planar_distance(trial.uav(hop).pos, merged_relay.pos) < 1e-9 &&
            hop != merged_relay.id)
          route_ok = false;
    }
    if (!route_ok) continue;
    // orient the new relay, then its neighbors, GS outward
    std::set<std::string> affected{merged_relay.id};
    for (const auto& l : links_of(trial, sessions, merged_relay.id))
      for (const auto& [id, u] : trial.uavs)
        if (planar_distance(u.pos, l.pos) < 1e-9) affected.insert(id);
    try {
      reorient_carriers(trial, sessions, affected, p, opt);
    } catch (const NoOrientation&) {
      continue;
    }
    auto rep = max_satisfaction(trial, sessions, p, /*strict=*/false);
    if (rep.min_lambda + opt.tolerance >= opt.lambda_target) {
      cfg = std::move(trial);
      ++st.next_id;
      return true;
    }
  }
  return false;
}

inline std::string owning_gs(const NetworkConfig& cfg, const std::vector<Session>& sessions,
                             const std::string& relay) {
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    for (const auto& hop : rit->second)
      if (hop == relay) return s.gs;
  }
  return {};
}

inline int session_sector(const NetworkConfig& cfg, const Session& s) {
  const auto& path = cfg.routes.at(s.id);
  const UavState& gs = cfg.uav(path.back());
  if (path.size() < 2) return 0;
  const UavState& first = cfg.uav(path[path.size() - 2]);
  if (planar_distance(gs.pos, first.pos) < 1e-9) return 0;
  return serving_radio(gs, bearing(gs.pos, first.pos));
}

// One contraction sweep over a relay subset: scan pairs from different
// session sets in deterministic order, contract the first feasible pair,
// rescan; stop when nothing contracts.
inline void contract_group(NetworkConfig& cfg, const std::vector<Session>& sessions,
                           const std::set<std::pair<std::string, int>>& group,
                           const std::vector<Vec2>& gs_positions, const LinkModelParams& p,
                           const PlannerOptions& opt, ContractionState& st, int& budget) {
  bool contracted = true;
  while (contracted && budget > 0) {
    contracted = false;
    std::vector<std::string> relays;
    for (const auto& [id, u] : cfg.uavs) {
      if (u.role != Role::Relay) continue;
      bool in_group = false;
      for (const auto& s : sessions) {
        auto rit = cfg.routes.find(s.id);
        if (rit == cfg.routes.end()) continue;
        bool on_route = false;
        for (const auto& hop : rit->second) on_route |= hop == id;
        if (on_route && group.count({s.gs, session_sector(cfg, s)})) in_group = true;
      }
      if (in_group) relays.push_back(id);
    }
    for (size_t a = 0; a < relays.size() && !contracted; ++a) {
      for (size_t b = a + 1; b < relays.size() && !contracted; ++b) {
        const std::string &i = relays[a], &j = relays[b];
        if (st.dead.count({i, j})) continue;
        auto si = sessions_through(cfg, sessions, i);
        auto sj = sessions_through(cfg, sessions, j);
        bool disjoint = true;
        for (const auto& x : si)
          for (const auto& y : sj) disjoint &= x != y;
        if (!disjoint) {
          st.dead.insert({i, j});
          continue;
        }
        if (try_contract(cfg, sessions, i, j, gs_positions, p, opt, st)) {
          contracted = true;
          --budget;
        } else {
          st.dead.insert({i, j});
        }
      }
    }
  }
}

}  // namespace detail

// Angular optimization across sessions: contract relay pairs within each GS
// sector, then across each pair of adjacent sectors, then (with several
// ground stations) across GSs. Contractions never increase the relay count
// and are only accepted when the referee confirms the lambda target.
inline NetworkConfig angular_contract(const NetworkConfig& input,
                                      const std::vector<Session>& sessions,
                                      const LinkModelParams& p, const PlannerOptions& opt) {
  NetworkConfig cfg = input;
  std::vector<std::pair<std::string, int>> gs_list;  // (gs id, num sectors)
  std::vector<Vec2> gs_positions;
  for (const auto& [id, u] : cfg.uavs)
    if (u.role == Role::GroundStation) {
      gs_list.push_back({id, u.num_radios});
      gs_positions.push_back(to_xy(u.pos));
    }
  detail::ContractionState st;
  int budget = opt.max_contraction_passes;
  for (const auto& [gid, nsec] : gs_list) {
    for (int m = 0; m < nsec; ++m)
      detail::contract_group(cfg, sessions, {{gid, m}}, gs_positions, p, opt, st, budget);
    for (int m = 0; m < nsec && nsec > 1; ++m) {
      std::set<std::pair<std::string, int>> virt{{gid, m}, {gid, (m + 1) % nsec}};
      detail::contract_group(cfg, sessions, virt, gs_positions, p, opt, st, budget);
    }
  }
  if (gs_list.size() > 1) {
    std::set<std::pair<std::string, int>> all;
    for (const auto& [gid, nsec] : gs_list)
      for (int m = 0; m < nsec; ++m) all.insert({gid, m});
    detail::contract_group(cfg, sessions, all, gs_positions, p, opt, st, budget);
  }
  max_satisfaction(cfg, sessions, p, /*strict=*/false);
  return cfg;
}

// Full DCR pipeline for a single ground station.
inline NetworkConfig plan(const std::vector<UavState>& apps, const std::vector<Session>& sessions,
                          const UavState& gs, const LinkModelParams& p,
                          const PlannerOptions& opt = {}) {
  for (const auto& s : sessions)
    if (s.demand > p.rate_cap) throw InfeasibleError("demand above rate cap: " + s.id);
  NetworkConfig cfg = radial_optimize(apps, sessions, gs, p, opt);
  cfg = angular_contract(cfg, sessions, p, opt);
  auto rep = max_satisfaction(cfg, sessions, p, /*strict=*/false);
  if (rep.min_lambda + opt.tolerance < opt.lambda_target)
    throw InfeasibleError("planner could not reach the lambda target");
  return cfg;
}

// Yaw-only adaptation: keep every position, re-run the orientation sweep at
// all traffic-carrying UAVs from the GS outward; succeeds only if the referee
// confirms the target afterwards.
inline std::optional<NetworkConfig> reorient_only(const NetworkConfig& input,
                                                  const std::vector<Session>& sessions,
                                                  const LinkModelParams& p,
                                                  const PlannerOptions& opt) {
  NetworkConfig cfg = input;
  try {
    detail::reorient_carriers(cfg, sessions, {}, p, opt);
  } catch (const NoOrientation&) {
    return std::nullopt;
  }
  auto rep = max_satisfaction(cfg, sessions, p, /*strict=*/false);
  if (rep.min_lambda + opt.tolerance < opt.lambda_target) return std::nullopt;
  return cfg;
}

struct MultiGsPlan {
  std::vector<std::string> chosen_gs;
  NetworkConfig config;
  std::vector<Session> sub_sessions;  // one per (session, chosen GS), demand split equally
};

// Greedy GS selection by marginal utility min_k(lambda_k) / |D|; demands are
// split equally across the chosen ground stations.
inline MultiGsPlan plan_multi_gs(const std::vector<UavState>& apps,
                                 const std::vector<Session>& sessions,
                                 const std::vector<UavState>& gs_candidates,
                                 const LinkModelParams& p, const PlannerOptions& opt = {}) {
  if (gs_candidates.empty()) throw InfeasibleError("no ground station candidates");

  auto build = [&](const std::vector<UavState>& chosen) {
    std::vector<Session> subs;
    NetworkConfig cfg;
    for (const auto& g : chosen) {
      std::vector<Session> mine;
      for (const auto& s : sessions) {
        Session sub = s;
        sub.id = s.id + "@" + g.id;
        sub.demand = s.demand / chosen.size();
        sub.gs = g.id;
        mine.push_back(sub);
        subs.push_back(sub);
      }
      NetworkConfig part = radial_optimize(apps, mine, g, p, opt, /*best_effort=*/true);
      for (auto& [id, u] : part.uavs) cfg.uavs[id] = u;
      for (auto& [sid, path] : part.routes) cfg.routes[sid] = path;
    }
    cfg = angular_contract(cfg, subs, p, opt);
    auto rep = max_satisfaction(cfg, subs, p, /*strict=*/false);
    // session satisfaction = worst of its sub-sessions
    double min_lambda = std::numeric_limits<double>::infinity();
    for (const auto& s : sessions) {
      double lam = std::numeric_limits<double>::infinity();
      for (const auto& sub : subs)
        if (sub.id.rfind(s.id + "@", 0) == 0)
          lam = std::min(lam, rep.per_session_lambda.at(sub.id));
      min_lambda = std::min(min_lambda, lam);
    }
    return std::tuple<NetworkConfig, std::vector<Session>, double>{cfg, subs, min_lambda};
  };

  std::vector<UavState> chosen;
  std::vector<UavState> remaining = gs_candidates;
  std::sort(remaining.begin(), remaining.end(),
            [](const UavState& a, const UavState& b) { return a.id < b.id; });
  MultiGsPlan best_plan;
  double best_lambda = -1;
  while (!remaining.empty()) {
    double best_utility = -1;
    size_t best_idx = 0;
    std::tuple<NetworkConfig, std::vector<Session>, double> best_build;
    for (size_t c = 0; c < remaining.size(); ++c) {
      std::vector<UavState> trial = chosen;
      trial.push_back(remaining[c]);
      auto result = build(trial);
      double uavs = static_cast<double>(std::get<0>(result).uavs.size());
      double utility = std::get<2>(result) / uavs;
      if (utility > best_utility) {
        best_utility = utility;
        best_idx = c;
        best_build = result;
      }
    }
    chosen.push_back(remaining[best_idx]);
    remaining.erase(remaining.begin() + best_idx);
    best_lambda = std::get<2>(best_build);
    best_plan.config = std::get<0>(best_build);
    best_plan.sub_sessions = std::get<1>(best_build);
    best_plan.chosen_gs.clear();
    for (const auto& g : chosen) best_plan.chosen_gs.push_back(g.id);
    if (best_lambda + opt.tolerance >= opt.lambda_target) return best_plan;
  }
  throw InfeasibleError("lambda target unmet with all ground stations in use");
}

}  // namespace skyhaul
