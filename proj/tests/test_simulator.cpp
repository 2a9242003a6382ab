#include <catch2/catch_amalgamated.hpp>

#include "skyhaul/simulator.hpp"

using namespace skyhaul;

namespace {

const double deg = kPi / 180.0;

UavState make_gs(int radios) {
  UavState gs;
  gs.id = "gs";
  gs.role = Role::GroundStation;
  gs.pos = PolarPos(0, 0, 0);
  gs.num_radios = radios;
  return gs;
}

Scenario static_scenario() {
  Scenario s;
  s.id = "static";
  s.model = default_params();
  s.gs_candidates = {make_gs(4)};
  s.duration = 10;
  s.trajectories["a1"] = {{0, to_xy(PolarPos{150, kPi / 4, 70})}};
  s.sessions = {{"s1", "a1", {{0, 450}}}};
  return s;
}

int count_events(const RunResult& r, EventKind k) {
  int n = 0;
  for (const auto& e : r.trace) n += e.kind == k;
  return n;
}

const TraceEvent* first_event(const RunResult& r, EventKind k) {
  for (const auto& e : r.trace)
    if (e.kind == k) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("validate_scenario rejects malformed inputs") {
  Scenario s = static_scenario();
  CHECK_NOTHROW(validate_scenario(s));
  SECTION("thresholds") {
    s.th_a = 0;
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
  SECTION("tick") {
    s.tick = -1;
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
  SECTION("no ground station") {
    s.gs_candidates.clear();
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
  SECTION("non-increasing waypoints") {
    s.trajectories["a1"] = {{0, {0, 0}}, {0, {1, 1}}};
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
  SECTION("session without trajectory") {
    s.sessions.push_back({"s2", "ghost", {{0, 100}}});
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
  SECTION("empty demand schedule") {
    s.sessions[0].demand.clear();
    CHECK_THROWS_AS(validate_scenario(s), ScenarioInvalid);
  }
}

TEST_CASE("demand_at and trajectory_at interpolate the schedules") {
  SessionSpec sp{"s", "a", {{0, 100}, {10, 400}, {20, 50}}};
  CHECK(demand_at(sp, 0) == 100);
  CHECK(demand_at(sp, 9.9) == 100);
  CHECK(demand_at(sp, 10) == 400);
  CHECK(demand_at(sp, 25) == 50);

  std::vector<Waypoint> wps{{0, {0, 0}}, {10, {100, 0}}, {20, {100, 50}}};
  CHECK(trajectory_at(wps, -5).x == 0);
  CHECK(trajectory_at(wps, 5).x == Catch::Approx(50));
  CHECK(trajectory_at(wps, 15).y == Catch::Approx(25));
  CHECK(trajectory_at(wps, 99).y == 50);
}

TEST_CASE("check_triggers prioritizes energy over retask over satisfaction") {
  CHECK(check_triggers(0.1, true, 5, 0.2) == TriggerKind::Energy);
  CHECK(check_triggers(0.9, true, 5, 0.2) == TriggerKind::Retask);
  CHECK(check_triggers(0.9, false, 3, 0.2) == TriggerKind::Satisfaction);
  CHECK_FALSE(check_triggers(0.9, false, 2, 0.2).has_value());
}

TEST_CASE("energy_step drains deployed UAVs linearly") {
  NetworkConfig cfg;
  UavState u;
  u.id = "r";
  u.energy = 1.0;
  cfg.uavs["r"] = u;
  energy_step(cfg, 60, 1200);
  CHECK(cfg.uavs["r"].energy == Catch::Approx(0.95));
  for (int i = 0; i < 100; ++i) energy_step(cfg, 60, 1200);
  CHECK(cfg.uavs["r"].energy == 0.0);
}

TEST_CASE("a static scenario plans once and never migrates") {
  auto r = run(static_scenario());
  CHECK(count_events(r, EventKind::Replan) == 1);
  CHECK(count_events(r, EventKind::MigrationStart) == 0);
  CHECK(r.metrics.migrations == 0);
  CHECK(r.metrics.min_lambda >= 1.0);
  CHECK(r.metrics.avg_relays == 0.0);
  CHECK(r.metrics.avg_throughput.at("s1") == Catch::Approx(450));
}

TEST_CASE("a retask near the GS is absorbed by reorientation") {
  Scenario s;
  s.model = default_params();
  s.gs_candidates = {make_gs(4)};
  s.duration = 10;
  s.trajectories["a1"] = {{0, to_xy(PolarPos{150, 90 * deg, 70})}};
  s.trajectories["a2"] = {{0, to_xy(PolarPos{150, 30 * deg, 70})},
                          {2, to_xy(PolarPos{80, 30 * deg, 70})}};
  s.sessions = {{"s1", "a1", {{0, 450}}}, {"s2", "a2", {{0, 450}}}};
  auto r = run(s);
  CHECK(count_events(r, EventKind::TriggerRetask) == 1);
  CHECK(count_events(r, EventKind::ReorientOnly) == 1);
  CHECK(count_events(r, EventKind::MigrationStart) == 0);
  CHECK(r.metrics.avg_relays == 0.0);
  const auto* e = first_event(r, EventKind::ReorientOnly);
  REQUIRE(e != nullptr);
  CHECK(e->num.at("min_lambda") >= 1.0);
}

TEST_CASE("a far retask replans and migrates through a safe layered plan") {
  Scenario s;
  s.model = default_params();
  s.gs_candidates = {make_gs(4)};
  s.relay_radios = 2;
  s.duration = 100;
  s.trajectories["a1"] = {{0, to_xy(PolarPos{400, 90 * deg, 70})},
                          {2, to_xy(PolarPos{300, 270 * deg, 70})}};
  s.sessions = {{"s1", "a1", {{0, 900}}}};
  auto r = run(s);
  CHECK(count_events(r, EventKind::TriggerRetask) == 1);
  CHECK(count_events(r, EventKind::Replan) == 2);
  REQUIRE(count_events(r, EventKind::MigrationStart) == 1);
  const auto* e = first_event(r, EventKind::MigrationStart);
  // the relay relocates across the ground station: it must climb a layer
  CHECK(e->num.at("layers") >= 2.0);
  CHECK(e->num.at("top_layer_offset") == Catch::Approx(s.migration.dz));
  CHECK(e->num.at("safe") == 1.0);
  CHECK(count_events(r, EventKind::MigrationEnd) == 1);
  const auto* end = first_event(r, EventKind::MigrationEnd);
  CHECK(end->time == Catch::Approx(e->time + e->num.at("makespan")).margin(s.tick + 1e-9));
  CHECK(r.metrics.migrations == 1);
  CHECK(r.metrics.downtime == Catch::Approx(e->num.at("makespan")));
  // the affected session delivers nothing while its relay is in the air
  CHECK(r.metrics.min_lambda == 0.0);
}

TEST_CASE("energy depletion swaps UAVs from the depot") {
  Scenario s = static_scenario();
  s.endurance = 20;  // drains 5 percent per tick
  s.duration = 40;
  auto r = run(s);
  CHECK(count_events(r, EventKind::UavSwap) >= 1);
  const auto* e = first_event(r, EventKind::UavSwap);
  REQUIRE(e != nullptr);
  // the threshold crossing happens once energy dips under th_e = 0.2
  CHECK(e->time == Catch::Approx(17).margin(1.01));
  CHECK(e->num.at("arrival") > e->time);
}
