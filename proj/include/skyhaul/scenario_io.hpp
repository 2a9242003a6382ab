#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyhaul/link_model.hpp"
#include "skyhaul/simulator.hpp"
#include "skyhaul/types.hpp"

// File formats: JSON scenarios and config dumps (degrees / meters / Mbps at
// the boundary, radians inside), NDJSON traces, CSV metric tables, and the
// synthetic zone generator.

namespace skyhaul {

inline constexpr int kSchemaVersion = 1;

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const auto& [key, val] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok |= a == key;
    if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
  }
}

template <typename T>
inline T get_req(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": bad type for field '" + key + "'");
  }
}

template <typename T>
inline T get_opt(const nlohmann::json& j, const std::string& key, T fallback,
                 const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": bad type for field '" + key + "'");
  }
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace detail

// ---- link model ----

inline nlohmann::ordered_json model_to_json(const LinkModelParams& p) {
  nlohmann::ordered_json j;
  j["a"] = p.a;
  j["b"] = p.b;
  j["c"] = p.c;
  j["d"] = p.d;
  j["e"] = p.e;
  j["f"] = p.f;
  j["conn_threshold"] = p.conn_threshold;
  j["rate_cap"] = p.rate_cap;
  j["max_fov_deg"] = detail::rad2deg(p.max_fov);
  return j;
}

inline LinkModelParams model_from_json(const nlohmann::json& j, const std::string& where) {
  detail::check_keys(j, {"a", "b", "c", "d", "e", "f", "conn_threshold", "rate_cap",
                         "max_fov_deg"},
                     where);
  LinkModelParams p;
  p.a = detail::get_req<double>(j, "a", where);
  p.b = detail::get_req<double>(j, "b", where);
  p.c = detail::get_req<double>(j, "c", where);
  p.d = detail::get_req<double>(j, "d", where);
  p.e = detail::get_req<double>(j, "e", where);
  p.f = detail::get_req<double>(j, "f", where);
  p.conn_threshold = detail::get_opt<double>(j, "conn_threshold", 100.0, where);
  p.rate_cap = detail::get_opt<double>(j, "rate_cap", 2310.0, where);
  p.max_fov = detail::deg2rad(detail::get_opt<double>(j, "max_fov_deg", 82.0, where));
  return p;
}

inline std::vector<AnchorSample> anchors_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("anchors: expected an array");
  std::vector<AnchorSample> out;
  int idx = 0;
  for (const auto& row : j) {
    std::string where = "anchors[" + std::to_string(idx++) + "]";
    detail::check_keys(row, {"distance_m", "dphi_deg", "mbps", "weight"}, where);
    AnchorSample s;
    s.distance = detail::get_req<double>(row, "distance_m", where);
    s.dphi = detail::deg2rad(detail::get_req<double>(row, "dphi_deg", where));
    s.throughput = detail::get_req<double>(row, "mbps", where);
    s.weight = detail::get_opt<double>(row, "weight", 1.0, where);
    out.push_back(s);
  }
  return out;
}

// ---- scenario ----

inline nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = s.id;
  j["model"] = model_to_json(s.model);
  auto& gs = j["gs"] = nlohmann::ordered_json::array();
  for (const auto& g : s.gs_candidates) {
    nlohmann::ordered_json o;
    o["id"] = g.id;
    Vec2 xy = to_xy(g.pos);
    o["x"] = xy.x;
    o["y"] = xy.y;
    o["radios"] = g.num_radios;
    gs.push_back(o);
  }
  j["relay_radios"] = s.relay_radios;
  auto& ss = j["sessions"] = nlohmann::ordered_json::array();
  for (const auto& sp : s.sessions) {
    nlohmann::ordered_json o;
    o["id"] = sp.id;
    o["app"] = sp.app_uav;
    auto& dd = o["demand"] = nlohmann::ordered_json::array();
    for (const auto& st : sp.demand) dd.push_back({{"time", st.time}, {"mbps", st.demand}});
    ss.push_back(o);
  }
  auto& tr = j["trajectories"] = nlohmann::ordered_json::object();
  for (const auto& [id, wps] : s.trajectories) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& w : wps) arr.push_back({{"time", w.time}, {"x", w.pos.x}, {"y", w.pos.y}});
    tr[id] = arr;
  }
  j["th_a"] = s.th_a;
  j["th_e"] = s.th_e;
  j["uav_speed"] = s.uav_speed;
  j["tick"] = s.tick;
  j["duration"] = s.duration;
  j["endurance"] = s.endurance;
  j["operating_alt"] = s.operating_alt;
  j["seed"] = s.seed;
  j["migration"] = {{"d_min", s.migration.d_min},
                    {"dz", s.migration.dz},
                    {"speed", s.migration.speed},
                    {"dt", s.migration.dt}};
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"schema_version", "id", "model", "gs", "relay_radios", "sessions",
                         "trajectories", "th_a", "th_e", "uav_speed", "tick", "duration",
                         "endurance", "operating_alt", "seed", "migration"},
                     "scenario");
  int ver = detail::get_req<int>(j, "schema_version", "scenario");
  if (ver != kSchemaVersion)
    throw ParseError("scenario: unsupported schema_version " + std::to_string(ver));
  Scenario s;
  s.id = detail::get_opt<std::string>(j, "id", "scenario", "scenario");
  s.model = j.contains("model") ? model_from_json(j.at("model"), "scenario.model")
                                : default_params();
  if (!j.contains("gs") || !j.at("gs").is_array() || j.at("gs").empty())
    throw ParseError("scenario: 'gs' must be a non-empty array");
  int gi = 0;
  for (const auto& o : j.at("gs")) {
    std::string where = "scenario.gs[" + std::to_string(gi++) + "]";
    detail::check_keys(o, {"id", "x", "y", "radios"}, where);
    UavState g;
    g.id = detail::get_req<std::string>(o, "id", where);
    g.role = Role::GroundStation;
    g.pos = from_cartesian(detail::get_req<double>(o, "x", where),
                           detail::get_req<double>(o, "y", where), 0);
    g.num_radios = detail::get_req<int>(o, "radios", where);
    if (g.num_radios < 1) throw ParseError(where + ": radios must be >= 1");
    s.gs_candidates.push_back(g);
  }
  s.relay_radios = detail::get_opt<int>(j, "relay_radios", 3, "scenario");
  if (j.contains("sessions")) {
    int si = 0;
    for (const auto& o : j.at("sessions")) {
      std::string where = "scenario.sessions[" + std::to_string(si++) + "]";
      detail::check_keys(o, {"id", "app", "demand"}, where);
      SessionSpec sp;
      sp.id = detail::get_req<std::string>(o, "id", where);
      sp.app_uav = detail::get_req<std::string>(o, "app", where);
      int di = 0;
      for (const auto& d : detail::get_req<nlohmann::json>(o, "demand", where)) {
        std::string dwhere = where + ".demand[" + std::to_string(di++) + "]";
        detail::check_keys(d, {"time", "mbps"}, dwhere);
        sp.demand.push_back({detail::get_req<double>(d, "time", dwhere),
                             detail::get_req<double>(d, "mbps", dwhere)});
      }
      s.sessions.push_back(sp);
    }
  }
  if (j.contains("trajectories")) {
    for (const auto& [id, arr] : j.at("trajectories").items()) {
      std::string where = "scenario.trajectories." + id;
      int wi = 0;
      std::vector<Waypoint> wps;
      for (const auto& w : arr) {
        std::string wwhere = where + "[" + std::to_string(wi++) + "]";
        detail::check_keys(w, {"time", "x", "y"}, wwhere);
        wps.push_back({detail::get_req<double>(w, "time", wwhere),
                       {detail::get_req<double>(w, "x", wwhere),
                        detail::get_req<double>(w, "y", wwhere)}});
      }
      s.trajectories[id] = wps;
    }
  }
  s.th_a = detail::get_opt<double>(j, "th_a", 0.75, "scenario");
  s.th_e = detail::get_opt<double>(j, "th_e", 0.2, "scenario");
  s.uav_speed = detail::get_opt<double>(j, "uav_speed", 5.0, "scenario");
  s.tick = detail::get_opt<double>(j, "tick", 1.0, "scenario");
  s.duration = detail::get_opt<double>(j, "duration", 0.0, "scenario");
  s.endurance = detail::get_opt<double>(j, "endurance", 1200.0, "scenario");
  s.operating_alt = detail::get_opt<double>(j, "operating_alt", 70.0, "scenario");
  s.seed = detail::get_opt<std::uint64_t>(j, "seed", 0, "scenario");
  if (j.contains("migration")) {
    const auto& m = j.at("migration");
    detail::check_keys(m, {"d_min", "dz", "speed", "dt"}, "scenario.migration");
    s.migration.d_min = detail::get_opt<double>(m, "d_min", 5.0, "scenario.migration");
    s.migration.dz = detail::get_opt<double>(m, "dz", 10.0, "scenario.migration");
    s.migration.speed = detail::get_opt<double>(m, "speed", 5.0, "scenario.migration");
    s.migration.dt = detail::get_opt<double>(m, "dt", 0.1, "scenario.migration");
  }
  return s;
}

// ---- configs ----

inline nlohmann::ordered_json config_to_json(const NetworkConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  auto& uavs = j["uavs"] = nlohmann::ordered_json::array();
  for (const auto& [id, u] : cfg.uavs) {
    nlohmann::ordered_json o;
    o["id"] = u.id;
    o["role"] = role_name(u.role);
    Vec2 xy = to_xy(u.pos);
    o["x"] = xy.x;
    o["y"] = xy.y;
    o["alt"] = u.pos.altitude;
    o["yaw_deg"] = detail::rad2deg(u.yaw);
    o["radios"] = u.num_radios;
    o["energy"] = u.energy;
    uavs.push_back(o);
  }
  auto& routes = j["routes"] = nlohmann::ordered_json::object();
  for (const auto& [sid, path] : cfg.routes) routes[sid] = path;
  auto& shares = j["shares"] = nlohmann::ordered_json::array();
  for (const auto& [key, gamma] : cfg.shares) {
    nlohmann::ordered_json o;
    o["uav"] = key.first.uav;
    o["radio"] = key.first.radio;
    o["session"] = key.second;
    o["gamma"] = gamma;
    shares.push_back(o);
  }
  return j;
}

inline NetworkConfig config_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"schema_version", "uavs", "routes", "shares"}, "config");
  NetworkConfig cfg;
  int ui = 0;
  for (const auto& o : detail::get_req<nlohmann::json>(j, "uavs", "config")) {
    std::string where = "config.uavs[" + std::to_string(ui++) + "]";
    detail::check_keys(o, {"id", "role", "x", "y", "alt", "yaw_deg", "radios", "energy"}, where);
    UavState u;
    u.id = detail::get_req<std::string>(o, "id", where);
    std::string role = detail::get_req<std::string>(o, "role", where);
    if (role == "gs") u.role = Role::GroundStation;
    else if (role == "relay") u.role = Role::Relay;
    else if (role == "app") u.role = Role::Application;
    else throw ParseError(where + ": unknown role '" + role + "'");
    u.pos = from_cartesian(detail::get_req<double>(o, "x", where),
                           detail::get_req<double>(o, "y", where),
                           detail::get_opt<double>(o, "alt", 0.0, where));
    u.yaw = normalize_angle(detail::deg2rad(detail::get_opt<double>(o, "yaw_deg", 0.0, where)));
    u.num_radios = detail::get_opt<int>(o, "radios", 1, where);
    u.energy = detail::get_opt<double>(o, "energy", 1.0, where);
    cfg.uavs[u.id] = u;
  }
  if (j.contains("routes"))
    for (const auto& [sid, path] : j.at("routes").items())
      cfg.routes[sid] = path.get<std::vector<std::string>>();
  if (j.contains("shares")) {
    int si = 0;
    for (const auto& o : j.at("shares")) {
      std::string where = "config.shares[" + std::to_string(si++) + "]";
      detail::check_keys(o, {"uav", "radio", "session", "gamma"}, where);
      RadioKey rk{detail::get_req<std::string>(o, "uav", where),
                  detail::get_req<int>(o, "radio", where)};
      cfg.shares[{rk, detail::get_req<std::string>(o, "session", where)}] =
          detail::get_req<double>(o, "gamma", where);
    }
  }
  return cfg;
}

// ---- trace and metrics ----

inline std::string trace_to_ndjson(const std::vector<TraceEvent>& trace) {
  std::ostringstream out;
  for (const auto& e : trace) {
    nlohmann::ordered_json j;
    j["v"] = kSchemaVersion;
    j["t"] = e.time;
    j["event"] = event_name(e.kind);
    for (const auto& [k, v] : e.num) j[k] = v;
    for (const auto& [k, v] : e.text) j[k] = v;
    out << j.dump() << "\n";
  }
  return out.str();
}

struct MetricsRow {
  std::string scenario;
  std::string algorithm;
  int relays = 0;
  double min_lambda = 0;
  double median_lambda = 0;
  int migrations = 0;
  double downtime_s = 0;
  double makespan_s = 0;
};

inline const char* kMetricsHeader =
    "scenario,algorithm,relays,min_lambda,median_lambda,migrations,downtime_s,makespan_s";

inline std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows)
    out << r.scenario << ',' << r.algorithm << ',' << r.relays << ',' << r.min_lambda << ','
        << r.median_lambda << ',' << r.migrations << ',' << r.downtime_s << ',' << r.makespan_s
        << "\n";
  return out.str();
}

// ---- zone generator ----

struct GenerateOptions {
  double zone_radius = 250;    // meters
  double min_app_radius = 100; // keep bearings well defined
  int relay_radios = 3;
  int gs_radios = 8;           // 0 = size to the zone's net demand
  double demand_lo = 100, demand_hi = 1000;  // Mbps
  double gs_budget = 0.9;  // max fraction of rate_cap any one GS radio window carries
};

// Synthetic evacuation zones: one GS at the center, app UAVs uniform in the
// disc, demands uniform in [lo, hi]. The GS radio count is sized to the net
// demand and demands are deterministically capped so that no angular window
// of one radio exceeds the budget; this keeps every instance plannable.
inline std::vector<Scenario> generate_zones(int num_zones, int apps_per_zone, int runs_per_zone,
                                            std::uint64_t seed, const LinkModelParams& p,
                                            const GenerateOptions& opt = {}) {
  if (num_zones < 1 || apps_per_zone < 1 || runs_per_zone < 1)
    throw ParseError("generate_zones: all counts must be >= 1");
  std::vector<Scenario> out;
  for (int z = 0; z < num_zones; ++z) {
    for (int run = 0; run < runs_per_zone; ++run) {
      std::mt19937_64 rng(seed ^ (static_cast<std::uint64_t>(z) << 32) ^
                          static_cast<std::uint64_t>(run * 2654435761u));
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Scenario s;
      s.id = "zone" + std::to_string(z) + "-run" + std::to_string(run) + "-n" +
             std::to_string(apps_per_zone);
      s.model = p;
      s.relay_radios = opt.relay_radios;
      s.seed = seed;
      struct App {
        double r, theta, demand;
      };
      std::vector<App> apps;
      double total = 0;
      for (int a = 0; a < apps_per_zone; ++a) {
        double r = opt.min_app_radius +
                   (opt.zone_radius - opt.min_app_radius) * std::sqrt(unif(rng));
        double theta = kTwoPi * unif(rng);
        double demand = opt.demand_lo + (opt.demand_hi - opt.demand_lo) * unif(rng);
        apps.push_back({r, theta, demand});
        total += demand;
      }
      // at least 4 radios: with fewer, the worst-sector misalignment plus the
      // relay-chain share exceeds the field of view
      int gs_radios = opt.gs_radios > 0
                          ? opt.gs_radios
                          : std::max(4, static_cast<int>(
                                            std::ceil(total / (opt.gs_budget * p.rate_cap))));
      // cap demands until every angular window of width 2*pi/gs_radios fits
      // its budget; the largest demand in the worst window shrinks first
      double budget = opt.gs_budget * p.rate_cap;
      for (int guard = 0; guard < 10000; ++guard) {
        double worst = 0;
        int worst_anchor = -1;
        double wedge = kTwoPi / gs_radios;
        for (size_t a = 0; a < apps.size(); ++a) {
          double sum = 0;
          for (const auto& b : apps)
            if (angular_distance(apps[a].theta, b.theta) <= wedge) sum += b.demand;
          if (sum > worst) {
            worst = sum;
            worst_anchor = static_cast<int>(a);
          }
        }
        if (worst <= budget) break;
        double wedge_anchor = apps[worst_anchor].theta;
        int victim = -1;
        for (size_t b = 0; b < apps.size(); ++b) {
          if (angular_distance(wedge_anchor, apps[b].theta) > kTwoPi / gs_radios) continue;
          if (victim < 0 || apps[b].demand > apps[victim].demand) victim = static_cast<int>(b);
        }
        double excess = worst - budget;
        apps[victim].demand = std::max(opt.demand_lo, apps[victim].demand - excess);
      }

      UavState gs;
      gs.id = "gs";
      gs.role = Role::GroundStation;
      gs.pos = PolarPos(0, 0, 0);
      gs.num_radios = gs_radios;
      s.gs_candidates.push_back(gs);
      for (int a = 0; a < apps_per_zone; ++a) {
        std::string app_id = "a" + std::to_string(a);
        SessionSpec sp;
        sp.id = "s" + std::to_string(a);
        sp.app_uav = app_id;
        sp.demand.push_back({0.0, apps[a].demand});
        s.sessions.push_back(sp);
        Vec2 xy = to_xy(PolarPos(apps[a].r, apps[a].theta));
        s.trajectories[app_id] = {{0.0, xy}};
      }
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace skyhaul
