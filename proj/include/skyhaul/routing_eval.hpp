#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skyhaul/link_model.hpp"
#include "skyhaul/types.hpp"

// Independent feasibility and satisfaction referee for any NetworkConfig.
// Planners must never be trusted over this module.

namespace skyhaul {

struct DisconnectedRoute : std::runtime_error {
  explicit DisconnectedRoute(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownSession : std::runtime_error {
  explicit UnknownSession(const std::string& id) : std::runtime_error("unknown session " + id) {}
};

enum class ViolationKind {
  MissingRoute,
  BadEndpoint,
  NonSimplePath,
  DisconnectedEdge,
  ShareOverflow,
  ShareBelowDemand,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct SatisfactionReport {
  std::map<std::string, double> per_session_lambda;
  double min_lambda = std::numeric_limits<double>::infinity();
  std::map<RadioKey, double> radio_utilization;
  std::vector<Violation> violations;
};

namespace detail {

// Flows traversing each radio: an edge consumes airtime at both the sender's
// and the receiver's serving radio (half-duplex accounting).
struct EdgeFlow {
  std::string session;
  double demand;
  double cap;  // link capacity of the edge carrying it
};

inline std::map<RadioKey, std::vector<EdgeFlow>> radio_flows(
    const NetworkConfig& cfg, const std::vector<Session>& sessions, const LinkModelParams& p) {
  std::map<RadioKey, std::vector<EdgeFlow>> flows;
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    const auto& path = rit->second;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const UavState& u = cfg.uav(path[i]);
      const UavState& v = cfg.uav(path[i + 1]);
      double cap = link_capacity(u, v, p);
      RadioKey ru{u.id, serving_radio(u, bearing(u.pos, v.pos))};
      RadioKey rv{v.id, serving_radio(v, bearing(v.pos, u.pos))};
      flows[ru].push_back({s.id, s.demand, cap});
      flows[rv].push_back({s.id, s.demand, cap});
    }
  }
  return flows;
}

}  // namespace detail

inline std::vector<Violation> validate(const NetworkConfig& cfg,
                                       const std::vector<Session>& sessions,
                                       const LinkModelParams& p, double lambda_target = 1.0) {
  std::vector<Violation> out;
  const double eps = 1e-9;
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) {
      out.push_back({ViolationKind::MissingRoute, s.id});
      continue;
    }
    const auto& path = rit->second;
    if (path.empty() || path.front() != s.app_uav || path.back() != s.gs) {
      out.push_back({ViolationKind::BadEndpoint, s.id});
      continue;
    }
    std::set<std::string> seen(path.begin(), path.end());
    if (seen.size() != path.size()) {
      out.push_back({ViolationKind::NonSimplePath, s.id});
      continue;
    }
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const UavState& u = cfg.uav(path[i]);
      const UavState& v = cfg.uav(path[i + 1]);
      if (!is_connected(u, v, p))
        out.push_back({ViolationKind::DisconnectedEdge, s.id + ":" + u.id + "-" + v.id});
    }
  }
  // per-radio share sums and per-edge delivered rate
  std::map<RadioKey, double> sums;
  for (const auto& [key, gamma] : cfg.shares) sums[key.first] += gamma;
  for (const auto& [radio, total] : sums)
    if (total > 1.0 + 1e-6)
      out.push_back({ViolationKind::ShareOverflow, radio.uav + ":" + std::to_string(radio.radio)});
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) continue;
    const auto& path = rit->second;
    bool structurally_ok = true;
    for (size_t i = 0; i + 1 < path.size() && structurally_ok; ++i) {
      const UavState& u = cfg.uav(path[i]);
      const UavState& v = cfg.uav(path[i + 1]);
      double cap = link_capacity(u, v, p);
      RadioKey ru{u.id, serving_radio(u, bearing(u.pos, v.pos))};
      RadioKey rv{v.id, serving_radio(v, bearing(v.pos, u.pos))};
      for (const RadioKey& rk : {ru, rv}) {
        auto it = cfg.shares.find({rk, s.id});
        double gamma = it == cfg.shares.end() ? 0.0 : it->second;
        if (gamma * cap + eps < lambda_target * s.demand) {
          out.push_back({ViolationKind::ShareBelowDemand,
                         s.id + ":" + rk.uav + ":" + std::to_string(rk.radio)});
          structurally_ok = false;
          break;
        }
      }
    }
  }
  return out;
}

// Computes the largest common lambda per radio with routes fixed:
//   lambda_radio = 1 / sum_flows(T_k / C_edge)
// and per-session lambda as the minimum over radios its route touches.
// Shares are assigned as gamma = min(lambda_s, 1) * T_k / C_edge, i.e. demand
// is the delivery ceiling. In strict mode a sub-threshold edge raises
// DisconnectedRoute; otherwise the affected sessions get lambda 0.
inline SatisfactionReport max_satisfaction(NetworkConfig& cfg, const std::vector<Session>& sessions,
                                           const LinkModelParams& p, bool strict = true) {
  SatisfactionReport rep;
  std::set<std::string> dead;  // sessions crossing a dead or sub-threshold edge
  for (const auto& s : sessions) {
    auto rit = cfg.routes.find(s.id);
    if (rit == cfg.routes.end()) {
      if (strict) throw DisconnectedRoute("no route for " + s.id);
      dead.insert(s.id);
      continue;
    }
    for (size_t i = 0; i + 1 < rit->second.size(); ++i) {
      const UavState& u = cfg.uav(rit->second[i]);
      const UavState& v = cfg.uav(rit->second[i + 1]);
      if (!is_connected(u, v, p)) {
        if (strict) throw DisconnectedRoute(s.id + ": edge " + u.id + "-" + v.id);
        dead.insert(s.id);
        break;
      }
    }
  }

  std::vector<Session> live;
  for (const auto& s : sessions)
    if (!dead.count(s.id)) live.push_back(s);
  auto flows = detail::radio_flows(cfg, live, p);

  std::map<RadioKey, double> radio_lambda;
  for (const auto& [radio, fl] : flows) {
    double load = 0;
    for (const auto& f : fl) load += f.demand / f.cap;
    radio_lambda[radio] = load > 0 ? 1.0 / load : std::numeric_limits<double>::infinity();
  }
  for (const auto& s : live) {
    double lam = std::numeric_limits<double>::infinity();
    const auto& path = cfg.routes.at(s.id);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const UavState& u = cfg.uav(path[i]);
      const UavState& v = cfg.uav(path[i + 1]);
      RadioKey ru{u.id, serving_radio(u, bearing(u.pos, v.pos))};
      RadioKey rv{v.id, serving_radio(v, bearing(v.pos, u.pos))};
      lam = std::min(lam, std::min(radio_lambda.at(ru), radio_lambda.at(rv)));
    }
    rep.per_session_lambda[s.id] = lam;
  }
  for (const auto& s : sessions)
    if (dead.count(s.id)) rep.per_session_lambda[s.id] = 0.0;

  cfg.shares.clear();
  for (const auto& s : live) {
    double gamma_lambda = std::min(rep.per_session_lambda.at(s.id), 1.0);
    const auto& path = cfg.routes.at(s.id);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const UavState& u = cfg.uav(path[i]);
      const UavState& v = cfg.uav(path[i + 1]);
      double cap = link_capacity(u, v, p);
      RadioKey ru{u.id, serving_radio(u, bearing(u.pos, v.pos))};
      RadioKey rv{v.id, serving_radio(v, bearing(v.pos, u.pos))};
      double gamma = cap > 0 ? gamma_lambda * s.demand / cap : 0.0;
      cfg.shares[{ru, s.id}] = gamma;
      cfg.shares[{rv, s.id}] = gamma;
    }
  }
  for (const auto& [key, gamma] : cfg.shares) rep.radio_utilization[key.first] += gamma;

  rep.min_lambda = std::numeric_limits<double>::infinity();
  for (const auto& [id, lam] : rep.per_session_lambda) rep.min_lambda = std::min(rep.min_lambda, lam);
  if (rep.per_session_lambda.empty()) rep.min_lambda = 0.0;
  return rep;
}

inline double session_throughput(const SatisfactionReport& rep, const Session& s) {
  auto it = rep.per_session_lambda.find(s.id);
  if (it == rep.per_session_lambda.end()) throw UnknownSession(s.id);
  return std::min(it->second, 1.0) * s.demand;
}

}  // namespace skyhaul
