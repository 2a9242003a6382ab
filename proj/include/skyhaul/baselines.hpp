#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "skyhaul/dcr_planner.hpp"
#include "skyhaul/link_model.hpp"
#include "skyhaul/routing_eval.hpp"
#include "skyhaul/types.hpp"

// Comparison algorithms sharing the link model and the referee, so relay
// counts and satisfaction are directly comparable with the full planner.

namespace skyhaul {

// Euclidean MST over {GS} + app UAVs; edges longer than the aligned
// connectivity range are subdivided with equally spaced relays. Connectivity
// first: satisfaction may end well below 1.
inline NetworkConfig steiner_mst(const std::vector<UavState>& apps,
                                 const std::vector<Session>& sessions, const UavState& gs,
                                 const LinkModelParams& p, const PlannerOptions& opt = {}) {
  double r_max = max_range(p.conn_threshold, 0, p);

  std::vector<UavState> nodes{gs};
  for (const auto& a : apps) nodes.push_back(a);
  size_t n = nodes.size();

  // Prim from the GS
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  best[0] = 0;
  for (size_t it = 0; it < n; ++it) {
    int u = -1;
    for (size_t v = 0; v < n; ++v)
      if (!in_tree[v] && (u < 0 || best[v] < best[u])) u = static_cast<int>(v);
    in_tree[u] = true;
    for (size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      double d = planar_distance(nodes[u].pos, nodes[v].pos);
      if (d < best[v]) {
        best[v] = d;
        parent[v] = u;
      }
    }
  }

  NetworkConfig cfg;
  for (const auto& u : nodes) cfg.uavs[u.id] = u;
  // tree adjacency over UAV ids, with subdivision relays inserted per edge
  std::map<std::string, std::vector<std::string>> adj;
  int relay_seq = 0;
  for (size_t v = 1; v < n; ++v) {
    const UavState& a = nodes[parent[v]];
    const UavState& b = nodes[v];
    double len = planar_distance(a.pos, b.pos);
    int pieces = len > r_max ? static_cast<int>(std::ceil(len / r_max)) : 1;
    std::string prev = a.id;
    Vec2 axy = to_xy(a.pos), bxy = to_xy(b.pos);
    for (int i = 1; i < pieces; ++i) {
      UavState relay;
      relay.id = "s-" + std::to_string(relay_seq++);
      relay.role = Role::Relay;
      Vec2 xy = axy + (bxy - axy) * (static_cast<double>(i) / pieces);
      relay.pos = from_cartesian(xy.x, xy.y, a.pos.altitude);
      relay.num_radios = opt.relay_radios;
      cfg.uavs[relay.id] = relay;
      adj[prev].push_back(relay.id);
      adj[relay.id].push_back(prev);
      prev = relay.id;
    }
    adj[prev].push_back(b.id);
    adj[b.id].push_back(prev);
  }

  // routes: unique tree path app -> GS
  for (const auto& s : sessions) {
    std::map<std::string, std::string> pred;
    std::queue<std::string> q;
    q.push(s.app_uav);
    pred[s.app_uav] = s.app_uav;
    while (!q.empty()) {
      std::string u = q.front();
      q.pop();
      if (u == gs.id) break;
      for (const auto& w : adj[u])
        if (!pred.count(w)) {
          pred[w] = u;
          q.push(w);
        }
    }
    std::vector<std::string> path;
    for (std::string u = gs.id; u != s.app_uav; u = pred.at(u)) path.push_back(u);
    path.push_back(s.app_uav);
    std::reverse(path.begin(), path.end());
    cfg.routes[s.id] = path;
  }

  // yaw every node toward its tree links; GS included
  std::vector<Session> dummy = sessions;
  for (const auto& [id, u] : cfg.uavs) {
    std::map<std::string, double> traffic;
    for (const auto& s : sessions) {
      const auto& path = cfg.routes.at(s.id);
      for (size_t k = 0; k < path.size(); ++k) {
        if (path[k] != id) continue;
        if (k > 0) traffic[path[k - 1]] += s.demand;
        if (k + 1 < path.size()) traffic[path[k + 1]] += s.demand;
      }
    }
    if (traffic.empty()) continue;
    std::vector<NeighborLink> links;
    for (const auto& [nb, t] : traffic) {
      const UavState& b = cfg.uav(nb);
      links.push_back({b.pos, b.yaw, b.num_radios, t});
    }
    try {
      cfg.uavs[id].yaw = solve_orient(u.pos, u.num_radios, links, p, opt).phi;
    } catch (const NoOrientation&) {
      // leave the yaw; the referee will price the misalignment
    }
  }
  max_satisfaction(cfg, sessions, p, /*strict=*/false);
  return cfg;
}

// Capacity-first baseline: every session gets a dedicated chain whose hop
// spacing supports the whole demand of its GS sector, so per-session GS-radio
// shares T_k / Cap always fit. No relay is shared across sessions.
inline NetworkConfig maxcap(const std::vector<UavState>& apps,
                            const std::vector<Session>& sessions, const UavState& gs,
                            const LinkModelParams& p, const PlannerOptions& opt = {}) {
  detail::RadialInput in{gs, apps, sessions};
  double chain = chain_misalign(opt.relay_radios);

  auto hops_for = [&](const SectorSession& k, double sector_demand) -> int {
    int cap_n = std::max(1, static_cast<int>(std::ceil(k.r / 2.0)));
    for (int trial = 1; trial <= cap_n; ++trial) {
      double h = k.r / trial;
      if (trial > 1 && capacity(h, chain, p) < sector_demand) continue;
      double dphi = k.gs_misalign + (trial > 1 ? chain / 2 : 0.0);
      if (capacity(h, dphi, p) >= sector_demand) return trial;
    }
    return -1;
  };

  auto cost_at = [&](double phi, std::map<std::string, int>* hops_out) -> double {
    std::vector<int> sectors;
    auto view = detail::sector_view(in, phi, &sectors);
    std::map<int, double> sector_demand;
    for (size_t i = 0; i < view.size(); ++i)
      if (sectors[i] >= 0) sector_demand[sectors[i]] += view[i].demand;
    double total = 0;
    for (size_t i = 0; i < view.size(); ++i) {
      if (sectors[i] < 0) continue;
      int n = hops_for(view[i], sector_demand[sectors[i]]);
      if (n < 0) return std::numeric_limits<double>::infinity();
      total += n;
      if (hops_out) (*hops_out)[view[i].id] = n;
    }
    return total;
  };

  double wedge = kTwoPi / std::max(1, gs.num_radios);
  double best_cost = std::numeric_limits<double>::infinity(), best_phi = 0;
  for (double phi = 0; phi < wedge - 1e-12; phi += opt.phi_grid_step) {
    double c = cost_at(phi, nullptr);
    if (c < best_cost) {
      best_cost = c;
      best_phi = phi;
    }
  }
  if (!std::isfinite(best_cost))
    throw InfeasibleError("sector demand exceeds per-hop capacity at every yaw");

  std::map<std::string, int> hops;
  cost_at(best_phi, &hops);

  NetworkConfig cfg;
  UavState gstate = gs;
  gstate.yaw = best_phi;
  cfg.uavs[gstate.id] = gstate;
  Vec2 gs_xy = to_xy(gstate.pos);
  for (const auto& s : sessions) {
    UavState app = detail::app_of(in, s);
    std::vector<std::string> path{app.id};
    auto hit = hops.find(s.id);
    if (hit != hops.end()) {
      double r = planar_distance(gstate.pos, app.pos);
      double theta = bearing(gstate.pos, app.pos);
      double h = r / hit->second;
      Vec2 dir{std::cos(theta), std::sin(theta)};
      for (int i = hit->second - 1; i >= 1; --i) {
        UavState relay;
        relay.id = "m-" + s.id + "-" + std::to_string(i);
        relay.role = Role::Relay;
        Vec2 xy = gs_xy + dir * (i * h);
        relay.pos = from_cartesian(xy.x, xy.y, gstate.pos.altitude);
        relay.yaw = normalize_angle(theta + chain / 2);
        relay.num_radios = opt.relay_radios;
        cfg.uavs[relay.id] = relay;
        path.push_back(relay.id);
      }
      app.yaw = normalize_angle(theta + kPi);
    }
    cfg.uavs[app.id] = app;
    path.push_back(gstate.id);
    cfg.routes[s.id] = path;
  }
  max_satisfaction(cfg, sessions, p, /*strict=*/false);
  return cfg;
}

// Radial optimization without the contraction pass.
inline NetworkConfig air_part(const std::vector<UavState>& apps,
                              const std::vector<Session>& sessions, const UavState& gs,
                              const LinkModelParams& p, const PlannerOptions& opt = {}) {
  return radial_optimize(apps, sessions, gs, p, opt);
}

// Yaw-only baseline: zero relays, direct app-GS links; the GS yaw is swept
// over the reachable apps, app UAVs face the GS.
inline NetworkConfig min_drone(const std::vector<UavState>& apps,
                               const std::vector<Session>& sessions, const UavState& gs,
                               const LinkModelParams& p, const PlannerOptions& opt = {}) {
  NetworkConfig cfg;
  cfg.uavs[gs.id] = gs;
  std::vector<std::pair<NeighborLink, double>> reachable;  // link, distance
  for (const auto& s : sessions) {
    const UavState* app = nullptr;
    for (const auto& a : apps)
      if (a.id == s.app_uav) app = &a;
    if (!app) throw std::out_of_range("no app UAV " + s.app_uav);
    UavState st = *app;
    double d = planar_distance(gs.pos, st.pos);
    if (d > 1e-9) {
      st.yaw = bearing(st.pos, gs.pos);  // face the GS
      if (capacity(d, 0, p) > 0)
        reachable.push_back({{st.pos, st.yaw, st.num_radios, s.demand}, d});
    }
    cfg.uavs[st.id] = st;
    cfg.routes[s.id] = {st.id, gs.id};
  }
  // drop the farthest neighbors until some GS yaw connects the rest
  std::sort(reachable.begin(), reachable.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  while (!reachable.empty()) {
    std::vector<NeighborLink> links;
    for (const auto& [l, d] : reachable) links.push_back(l);
    try {
      cfg.uavs[gs.id].yaw = solve_orient(gs.pos, gs.num_radios, links, p, opt).phi;
      break;
    } catch (const NoOrientation&) {
      reachable.pop_back();
    }
  }
  max_satisfaction(cfg, sessions, p, /*strict=*/false);
  return cfg;
}

}  // namespace skyhaul
