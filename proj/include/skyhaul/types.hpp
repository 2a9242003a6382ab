#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "skyhaul/geometry.hpp"

namespace skyhaul {

enum class Role { GroundStation, Relay, Application };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::GroundStation: return "gs";
    case Role::Relay: return "relay";
    case Role::Application: return "app";
  }
  return "?";
}

struct UavState {
  std::string id;
  Role role = Role::Relay;
  PolarPos pos;
  double yaw = 0;      // radians in [0, 2*pi); radio m boresight = yaw + m*2*pi/M
  int num_radios = 1;  // M >= 1
  double energy = 1.0; // fraction in [0, 1]
};

struct Session {
  std::string id;
  std::string app_uav;
  double demand = 0;  // Mbps, > 0
  std::string gs;
};

// Identifies one radio of one UAV.
struct RadioKey {
  std::string uav;
  int radio = 0;
  bool operator<(const RadioKey& o) const {
    if (uav != o.uav) return uav < o.uav;
    return radio < o.radio;
  }
  bool operator==(const RadioKey& o) const { return uav == o.uav && radio == o.radio; }
};

// The configuration D = {(p_i, phi_i, X_i)}: UAV set, one simple path per
// session, and per-radio time shares of each incident link-flow.
struct NetworkConfig {
  std::map<std::string, UavState> uavs;
  // session id -> ordered path of UAV ids, app UAV first, GS UAV last
  std::map<std::string, std::vector<std::string>> routes;
  // (radio, session) -> time fraction gamma in [0, 1]
  std::map<std::pair<RadioKey, std::string>, double> shares;

  const UavState& uav(const std::string& id) const {
    auto it = uavs.find(id);
    if (it == uavs.end()) throw std::out_of_range("unknown uav " + id);
    return it->second;
  }
  int relay_count() const {
    int n = 0;
    for (auto& [id, u] : uavs)
      if (u.role == Role::Relay) ++n;
    return n;
  }
};

struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace skyhaul
