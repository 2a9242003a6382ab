#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "skyhaul/dcr_planner.hpp"
#include "skyhaul/link_model.hpp"
#include "skyhaul/migration.hpp"
#include "skyhaul/routing_eval.hpp"
#include "skyhaul/types.hpp"

// Discrete-time replay: scripted app trajectories and demand schedules drive
// the planner through the monitor / adapt / migrate loop.

namespace skyhaul {

struct ScenarioInvalid : std::runtime_error {
  explicit ScenarioInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct DemandStep {
  double time = 0;    // seconds; demand holds from here to the next step
  double demand = 0;  // Mbps
};

struct SessionSpec {
  std::string id;
  std::string app_uav;
  std::vector<DemandStep> demand;
};

struct Waypoint {
  double time = 0;
  Vec2 pos;
};

struct Scenario {
  std::string id = "scenario";
  LinkModelParams model;
  std::vector<UavState> gs_candidates;
  std::vector<SessionSpec> sessions;
  std::map<std::string, std::vector<Waypoint>> trajectories;  // app UAV id -> waypoints
  double th_a = 0.75;        // satisfaction trigger threshold
  double th_e = 0.2;         // energy swap threshold
  double uav_speed = 5.0;    // m/s
  double tick = 1.0;         // seconds
  double duration = 0;       // seconds
  double endurance = 1200;   // seconds of flight per full charge
  double operating_alt = 70; // meters
  int relay_radios = 3;
  std::uint64_t seed = 0;
  MigrationOptions migration;
};

inline void validate_scenario(const Scenario& s) {
  if (s.th_a <= 0 || s.th_a > 1) throw ScenarioInvalid("th_a out of (0,1]");
  if (s.th_e <= 0 || s.th_e > 1) throw ScenarioInvalid("th_e out of (0,1]");
  if (s.tick <= 0) throw ScenarioInvalid("tick must be positive");
  if (s.duration < 0) throw ScenarioInvalid("negative duration");
  if (s.gs_candidates.empty()) throw ScenarioInvalid("no ground station candidates");
  for (const auto& [id, wps] : s.trajectories) {
    if (wps.empty()) throw ScenarioInvalid("empty trajectory for " + id);
    for (size_t i = 1; i < wps.size(); ++i)
      if (wps[i].time <= wps[i - 1].time)
        throw ScenarioInvalid("waypoint times not strictly increasing for " + id);
  }
  for (const auto& sp : s.sessions) {
    if (sp.demand.empty()) throw ScenarioInvalid("no demand schedule for " + sp.id);
    if (!s.trajectories.count(sp.app_uav))
      throw ScenarioInvalid("no trajectory for app UAV " + sp.app_uav);
  }
}

inline double demand_at(const SessionSpec& sp, double t) {
  double d = sp.demand.front().demand;
  for (const auto& step : sp.demand)
    if (step.time <= t) d = step.demand;
  return d;
}

inline Vec2 trajectory_at(const std::vector<Waypoint>& wps, double t) {
  if (t <= wps.front().time) return wps.front().pos;
  for (size_t i = 1; i < wps.size(); ++i) {
    if (t <= wps[i].time) {
      double a = wps[i - 1].time, b = wps[i].time;
      double u = (t - a) / (b - a);
      return wps[i - 1].pos + (wps[i].pos - wps[i - 1].pos) * u;
    }
  }
  return wps.back().pos;
}

enum class TriggerKind { Energy, Retask, Satisfaction };

enum class EventKind {
  Tick,
  TriggerSatisfaction,
  TriggerEnergy,
  TriggerRetask,
  ReorientOnly,
  Replan,
  MigrationStart,
  MigrationEnd,
  UavSwap,
};

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::Tick: return "tick";
    case EventKind::TriggerSatisfaction: return "trigger_satisfaction";
    case EventKind::TriggerEnergy: return "trigger_energy";
    case EventKind::TriggerRetask: return "trigger_retask";
    case EventKind::ReorientOnly: return "reorient_only";
    case EventKind::Replan: return "replan";
    case EventKind::MigrationStart: return "migration_start";
    case EventKind::MigrationEnd: return "migration_end";
    case EventKind::UavSwap: return "uav_swap";
  }
  return "?";
}

struct TraceEvent {
  double time = 0;
  EventKind kind = EventKind::Tick;
  std::map<std::string, double> num;
  std::map<std::string, std::string> text;
};

struct RunMetrics {
  std::map<std::string, double> avg_throughput;  // session id -> time-averaged Mbps
  double avg_relays = 0;
  double min_lambda = std::numeric_limits<double>::infinity();
  double median_lambda = 0;
  int migrations = 0;
  double downtime = 0;       // total seconds spent migrating
  double makespan_total = 0; // sum of migration makespans
};

struct RunResult {
  std::vector<TraceEvent> trace;
  RunMetrics metrics;
};

// Priority: energy beats retask beats satisfaction. The satisfaction trigger
// carries a hysteresis count maintained by the caller.
inline std::optional<TriggerKind> check_triggers(double min_energy, bool retasked,
                                                 int ticks_below_tha, double th_e,
                                                 int hysteresis = 3) {
  if (min_energy < th_e) return TriggerKind::Energy;
  if (retasked) return TriggerKind::Retask;
  if (ticks_below_tha >= hysteresis) return TriggerKind::Satisfaction;
  return std::nullopt;
}

// One tick of energy decay for every deployed UAV; never-deployed candidates
// are untouched because they are not in the config.
inline void energy_step(NetworkConfig& cfg, double tick, double endurance) {
  for (auto& [id, u] : cfg.uavs) u.energy = std::max(0.0, u.energy - tick / endurance);
}

namespace detail {

inline std::vector<UavState> current_apps(const Scenario& scn, double t) {
  std::vector<UavState> apps;
  for (const auto& [id, wps] : scn.trajectories) {
    UavState a;
    a.id = id;
    a.role = Role::Application;
    Vec2 xy = trajectory_at(wps, t);
    a.pos = from_cartesian(xy.x, xy.y, scn.operating_alt);
    a.num_radios = scn.relay_radios;  // same radio platform as the relays
    apps.push_back(a);
  }
  return apps;
}

inline std::vector<Session> current_sessions(const Scenario& scn, double t) {
  std::vector<Session> out;
  for (const auto& sp : scn.sessions) {
    Session s;
    s.id = sp.id;
    s.app_uav = sp.app_uav;
    s.demand = demand_at(sp, t);
    s.gs = scn.gs_candidates.front().id;
    out.push_back(s);
  }
  return out;
}

struct PlanOutcome {
  NetworkConfig config;
  std::vector<Session> eval_sessions;  // sub-sessions under several GSs
};

inline PlanOutcome plan_scenario(const Scenario& scn, double t, const PlannerOptions& popt) {
  auto apps = current_apps(scn, t);
  auto sessions = current_sessions(scn, t);
  PlanOutcome out;
  if (scn.gs_candidates.size() == 1) {
    try {
      out.config = plan(apps, sessions, scn.gs_candidates.front(), scn.model, popt);
    } catch (const InfeasibleError&) {
      // degrade gracefully: best-effort radial plus contraction
      out.config = radial_optimize(apps, sessions, scn.gs_candidates.front(), scn.model, popt,
                                   /*best_effort=*/true);
      PlannerOptions relaxed = popt;
      relaxed.lambda_target = 0;  // contract whatever the referee allows
      out.config = angular_contract(out.config, sessions, scn.model, relaxed);
    }
    out.eval_sessions = sessions;
  } else {
    auto mg = plan_multi_gs(apps, sessions, scn.gs_candidates, scn.model, popt);
    out.config = mg.config;
    out.eval_sessions = mg.sub_sessions;
  }
  return out;
}

// Old and new relay position sets padded with GS positions so launches and
// retirements match against the depot.
inline std::vector<Move> relay_moves(const NetworkConfig& before, const NetworkConfig& after,
                                     const Scenario& scn) {
  std::map<std::string, Vec2> from, to;
  for (const auto& [id, u] : before.uavs)
    if (u.role == Role::Relay) from["o:" + id] = to_xy(u.pos);
  for (const auto& [id, u] : after.uavs)
    if (u.role == Role::Relay) to["n:" + id] = to_xy(u.pos);
  Vec2 depot = to_xy(scn.gs_candidates.front().pos);
  int pad = 0;
  while (from.size() < to.size()) from["o:_depot" + std::to_string(pad++)] = depot;
  while (to.size() < from.size()) to["n:_depot" + std::to_string(pad++)] = depot;

  auto match = m2bm(from, to);
  std::vector<Move> moves;
  for (const auto& [a, b] : match.assignment) {
    Move m;
    m.id = b.substr(2);
    m.from = {from.at(a).x, from.at(a).y, scn.operating_alt};
    m.to = {to.at(b).x, to.at(b).y, scn.operating_alt};
    moves.push_back(m);
  }
  // stationary UAVs are obstacles with zero-length segments
  for (const auto& [id, u] : after.uavs) {
    if (u.role == Role::Relay) continue;
    Vec2 xy = to_xy(u.pos);
    moves.push_back({id, {xy.x, xy.y, scn.operating_alt}, {xy.x, xy.y, scn.operating_alt}});
  }
  std::sort(moves.begin(), moves.end(), [](const Move& a, const Move& b) { return a.id < b.id; });
  return moves;
}

inline std::set<std::string> affected_sessions(const NetworkConfig& before,
                                               const NetworkConfig& after,
                                               const std::vector<Move>& moves) {
  std::set<std::string> movers;
  for (const auto& m : moves) {
    double d = std::hypot(m.to.x - m.from.x, m.to.y - m.from.y);
    if (d > 1e-9) movers.insert(m.id);
  }
  std::set<std::string> out;
  for (const auto* cfg : {&before, &after})
    for (const auto& [sid, path] : cfg->routes)
      for (const auto& hop : path)
        if (movers.count(hop)) out.insert(sid);
  return out;
}

inline std::string parent_session(const std::string& id) {
  auto at = id.find('@');
  return at == std::string::npos ? id : id.substr(0, at);
}

}  // namespace detail

inline RunResult run(const Scenario& scn) {
  validate_scenario(scn);
  RunResult result;
  PlannerOptions popt;
  popt.relay_radios = scn.relay_radios;

  auto emit = [&](double t, EventKind k) -> TraceEvent& {
    result.trace.push_back({t, k, {}, {}});
    return result.trace.back();
  };

  auto outcome = detail::plan_scenario(scn, 0, popt);
  NetworkConfig cfg = outcome.config;
  auto rep = max_satisfaction(cfg, outcome.eval_sessions, scn.model, /*strict=*/false);
  {
    auto& e = emit(0, EventKind::Replan);
    e.num["relays"] = cfg.relay_count();
    e.num["min_lambda"] = rep.min_lambda;
  }

  std::map<std::string, double> delivered;  // session id -> Mbit total
  std::map<std::string, double> swap_arrival;
  std::vector<double> lambda_samples;
  double relay_ticks = 0;
  int below_count = 0;
  double migration_end = -1;
  std::set<std::string> migrating_sessions;
  double elapsed = 0;

  int steps = static_cast<int>(std::round(scn.duration / scn.tick));
  for (int step = 1; step <= steps; ++step) {
    double t = step * scn.tick;
    elapsed = t;

    // scripted app motion
    for (const auto& [id, wps] : scn.trajectories) {
      auto it = cfg.uavs.find(id);
      if (it == cfg.uavs.end()) continue;
      Vec2 xy = trajectory_at(wps, t);
      it->second.pos = from_cartesian(xy.x, xy.y, scn.operating_alt);
    }

    energy_step(cfg, scn.tick, scn.endurance);

    // energy swaps: replacement flies in from the GS at uav_speed
    for (auto& [id, u] : cfg.uavs) {
      if (u.role == Role::GroundStation || u.energy >= scn.th_e) continue;
      if (swap_arrival.count(id)) continue;
      double dist = planar_distance(u.pos, scn.gs_candidates.front().pos);
      swap_arrival[id] = t + dist / scn.uav_speed;
      auto& e = emit(t, EventKind::UavSwap);
      e.text["uav"] = id;
      e.num["arrival"] = swap_arrival[id];
    }
    for (auto it = swap_arrival.begin(); it != swap_arrival.end();) {
      if (it->second <= t) {
        cfg.uavs[it->first].energy = 1.0;
        it = swap_arrival.erase(it);
      } else {
        ++it;
      }
    }

    auto sessions_now = scn.gs_candidates.size() == 1
                            ? detail::current_sessions(scn, t)
                            : outcome.eval_sessions;  // multi-GS splits keep their demand
    if (scn.gs_candidates.size() == 1) outcome.eval_sessions = sessions_now;
    rep = max_satisfaction(cfg, sessions_now, scn.model, /*strict=*/false);

    bool migrating = migration_end > t;
    if (!migrating && migration_end >= 0) {
      auto& e = emit(t, EventKind::MigrationEnd);
      e.num["relays"] = cfg.relay_count();
      migration_end = -1;
      migrating_sessions.clear();
      rep = max_satisfaction(cfg, sessions_now, scn.model, /*strict=*/false);
    }

    // delivered traffic accounting
    std::map<std::string, double> parent_lambda;
    for (const auto& s : sessions_now) {
      double lam = rep.per_session_lambda.count(s.id) ? rep.per_session_lambda.at(s.id) : 0.0;
      if (migrating && migrating_sessions.count(s.id)) lam = 0;
      for (const auto& hop : cfg.routes.count(s.id) ? cfg.routes.at(s.id)
                                                    : std::vector<std::string>{})
        if (swap_arrival.count(hop)) lam = 0;
      delivered[detail::parent_session(s.id)] += std::min(lam, 1.0) * s.demand * scn.tick;
      std::string parent = detail::parent_session(s.id);
      auto it = parent_lambda.find(parent);
      parent_lambda[parent] = it == parent_lambda.end() ? lam : std::min(it->second, lam);
    }
    double min_lambda = std::numeric_limits<double>::infinity();
    for (const auto& [sid, lam] : parent_lambda) min_lambda = std::min(min_lambda, lam);
    if (parent_lambda.empty()) min_lambda = 0;
    lambda_samples.push_back(min_lambda);
    result.metrics.min_lambda = std::min(result.metrics.min_lambda, min_lambda);
    relay_ticks += cfg.relay_count();
    {
      auto& e = emit(t, EventKind::Tick);
      e.num["min_lambda"] = min_lambda;
      e.num["relays"] = cfg.relay_count();
    }

    if (migrating) continue;  // adapt only between migrations

    // trigger evaluation
    double min_energy = 1.0;
    for (const auto& [id, u] : cfg.uavs)
      if (u.role != Role::GroundStation) min_energy = std::min(min_energy, u.energy);
    bool retasked = false;
    for (const auto& [id, wps] : scn.trajectories)
      for (const auto& wp : wps)
        if (wp.time > 0 && wp.time > t - scn.tick && wp.time <= t) retasked = true;
    if (min_lambda < scn.th_a) ++below_count;
    else below_count = 0;

    auto trig = check_triggers(min_energy, retasked, below_count, scn.th_e);
    if (!trig) continue;
    switch (*trig) {
      case TriggerKind::Energy: emit(t, EventKind::TriggerEnergy); break;
      case TriggerKind::Retask: emit(t, EventKind::TriggerRetask); break;
      case TriggerKind::Satisfaction: emit(t, EventKind::TriggerSatisfaction); break;
    }
    below_count = 0;
    if (*trig == TriggerKind::Energy) continue;  // handled by the swap logic

    auto reoriented = reorient_only(cfg, sessions_now, scn.model, popt);
    if (reoriented) {
      cfg = *reoriented;
      auto& e = emit(t, EventKind::ReorientOnly);
      e.num["min_lambda"] = max_satisfaction(cfg, sessions_now, scn.model, false).min_lambda;
      continue;
    }

    auto replanned = detail::plan_scenario(scn, t, popt);
    auto moves = detail::relay_moves(cfg, replanned.config, scn);
    auto affected = detail::affected_sessions(cfg, replanned.config, moves);
    NetworkConfig old_cfg = cfg;
    cfg = replanned.config;
    outcome = replanned;
    {
      auto& e = emit(t, EventKind::Replan);
      e.num["relays"] = cfg.relay_count();
      e.num["min_lambda"] = max_satisfaction(cfg, outcome.eval_sessions, scn.model, false).min_lambda;
    }
    bool any_motion = false;
    for (const auto& m : moves)
      any_motion |= std::hypot(m.to.x - m.from.x, m.to.y - m.from.y) > 1e-9;
    if (any_motion) {
      MigrationOptions mopt = scn.migration;
      auto plan3 = build_plan(moves, mopt);
      double mk = plan3.makespan();
      migration_end = t + mk;
      migrating_sessions = affected;
      result.metrics.migrations += 1;
      result.metrics.makespan_total += mk;
      result.metrics.downtime += mk;
      auto& e = emit(t, EventKind::MigrationStart);
      e.num["makespan"] = mk;
      e.num["moves"] = static_cast<double>(moves.size());
      int max_color = 0;
      for (const auto& [id, c] : plan3.colors) max_color = std::max(max_color, c);
      e.num["layers"] = max_color + 1;
      e.num["safe"] = verify_plan(plan3, mopt) ? 1.0 : 0.0;
      double top = 0;
      for (const auto& [id, alt] : plan3.layer_alt)
        top = std::max(top, alt - scn.operating_alt);
      e.num["top_layer_offset"] = top;
    }
  }

  for (auto& [sid, mbit] : delivered)
    result.metrics.avg_throughput[sid] = elapsed > 0 ? mbit / elapsed : 0;
  result.metrics.avg_relays = steps > 0 ? relay_ticks / steps : cfg.relay_count();
  if (!lambda_samples.empty()) {
    std::sort(lambda_samples.begin(), lambda_samples.end());
    result.metrics.median_lambda = lambda_samples[lambda_samples.size() / 2];
  } else {
    result.metrics.min_lambda = rep.min_lambda;
    result.metrics.median_lambda = rep.min_lambda;
  }
  return result;
}

}  // namespace skyhaul
