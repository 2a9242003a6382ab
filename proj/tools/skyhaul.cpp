#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "skyhaul/baselines.hpp"
#include "skyhaul/dcr_planner.hpp"
#include "skyhaul/migration.hpp"
#include "skyhaul/scenario_io.hpp"
#include "skyhaul/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw skyhaul::ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

nlohmann::json parse_json(const std::string& text, const std::string& path) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw skyhaul::ParseError(path + ": " + e.what());
  }
}

skyhaul::Scenario load_scenario(const std::string& path) {
  return skyhaul::scenario_from_json(parse_json(read_file(path), path));
}

skyhaul::LinkModelParams load_model(const std::string& path) {
  if (path.empty()) return skyhaul::default_params();
  return skyhaul::model_from_json(parse_json(read_file(path), path), path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else write_file(out_path, content);
}

skyhaul::NetworkConfig plan_with(const std::string& algo, const skyhaul::Scenario& scn) {
  auto apps = skyhaul::detail::current_apps(scn, 0);
  auto sessions = skyhaul::detail::current_sessions(scn, 0);
  skyhaul::PlannerOptions opt;
  opt.relay_radios = scn.relay_radios;
  const auto& gs = scn.gs_candidates.front();
  if (algo == "skyhaul") {
    if (scn.gs_candidates.size() > 1)
      return skyhaul::plan_multi_gs(apps, sessions, scn.gs_candidates, scn.model, opt).config;
    return skyhaul::plan(apps, sessions, gs, scn.model, opt);
  }
  if (algo == "steiner-mst") return skyhaul::steiner_mst(apps, sessions, gs, scn.model, opt);
  if (algo == "maxcap") return skyhaul::maxcap(apps, sessions, gs, scn.model, opt);
  if (algo == "air-part") return skyhaul::air_part(apps, sessions, gs, scn.model, opt);
  if (algo == "min-drone") return skyhaul::min_drone(apps, sessions, gs, scn.model, opt);
  throw skyhaul::ParseError("unknown algorithm '" + algo + "'");
}

skyhaul::MetricsRow static_row(const std::string& algo, const skyhaul::Scenario& scn) {
  auto cfg = plan_with(algo, scn);
  auto sessions = skyhaul::detail::current_sessions(scn, 0);
  auto rep = skyhaul::max_satisfaction(cfg, sessions, scn.model, /*strict=*/false);
  std::vector<double> lambdas;
  for (const auto& [sid, lam] : rep.per_session_lambda) lambdas.push_back(lam);
  std::sort(lambdas.begin(), lambdas.end());
  skyhaul::MetricsRow row;
  row.scenario = scn.id;
  row.algorithm = algo;
  row.relays = cfg.relay_count();
  row.min_lambda = rep.min_lambda;
  row.median_lambda = lambdas.empty() ? 0 : lambdas[lambdas.size() / 2];
  return row;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV mmWave mesh backhaul planner and simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, model_path;
  std::string old_path, new_path;
  std::vector<std::string> scenario_paths, algos;
  std::string trace_path, metrics_path, anchors_path;
  int zones = 14, apps = 5, runs = 10;
  std::uint64_t seed = 1;
  skyhaul::MigrationOptions mopt;

  auto* plan_cmd = app.add_subcommand("plan", "plan a scenario and dump the configuration");
  plan_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  plan_cmd->add_option("--out", out_path, "output file (default: stdout)");

  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario through the control loop");
  sim_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  sim_cmd->add_option("--trace", trace_path, "NDJSON trace output file");
  sim_cmd->add_option("--metrics", metrics_path, "metrics CSV output file");

  auto* mig_cmd = app.add_subcommand("migrate", "plan a collision-free reconfiguration");
  mig_cmd->add_option("--old", old_path, "current configuration JSON")->required();
  mig_cmd->add_option("--new", new_path, "target configuration JSON")->required();
  mig_cmd->add_option("--d-min", mopt.d_min, "separation distance, meters");
  mig_cmd->add_option("--dz", mopt.dz, "layer spacing, meters");
  mig_cmd->add_option("--speed", mopt.speed, "UAV speed, m/s");
  mig_cmd->add_option("--out", out_path, "output file (default: stdout)");

  auto* cmp_cmd = app.add_subcommand("compare", "run all algorithms over scenario files");
  cmp_cmd->add_option("--scenarios", scenario_paths, "scenario JSON files")->required();
  cmp_cmd->add_option("--algo", algos, "algorithms (default: all five)");
  cmp_cmd->add_option("--out", out_path, "CSV output file (default: stdout)");

  auto* gen_cmd = app.add_subcommand("generate", "generate synthetic evacuation zones");
  gen_cmd->add_option("--zones", zones, "number of zones");
  gen_cmd->add_option("--apps", apps, "app UAVs per zone");
  gen_cmd->add_option("--runs", runs, "runs per zone");
  gen_cmd->add_option("--seed", seed, "RNG seed");
  gen_cmd->add_option("--model", model_path, "link model JSON (default: bundled fit)");
  gen_cmd->add_option("--out", out_path, "output directory")->required();

  auto* fit_cmd = app.add_subcommand("fit", "fit the capacity surface to an anchor table");
  fit_cmd->add_option("--anchors", anchors_path, "anchor JSON array (default: bundled table)");
  fit_cmd->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << R"({"kind":"parse","error":")" << e.what() << "\"}\n";
    return kExitParse;
  }

  try {
    if (*plan_cmd) {
      auto scn = load_scenario(scenario_path);
      auto cfg = plan_with("skyhaul", scn);
      emit(out_path, skyhaul::config_to_json(cfg).dump(2) + "\n");
    } else if (*sim_cmd) {
      auto scn = load_scenario(scenario_path);
      auto result = skyhaul::run(scn);
      emit(trace_path, skyhaul::trace_to_ndjson(result.trace));
      skyhaul::MetricsRow row;
      row.scenario = scn.id;
      row.algorithm = "skyhaul";
      row.relays = static_cast<int>(result.metrics.avg_relays + 0.5);
      row.min_lambda = result.metrics.min_lambda;
      row.median_lambda = result.metrics.median_lambda;
      row.migrations = result.metrics.migrations;
      row.downtime_s = result.metrics.downtime;
      row.makespan_s = result.metrics.makespan_total;
      emit(metrics_path, skyhaul::metrics_to_csv({row}));
    } else if (*mig_cmd) {
      auto before = skyhaul::config_from_json(parse_json(read_file(old_path), old_path));
      auto after = skyhaul::config_from_json(parse_json(read_file(new_path), new_path));
      std::map<std::string, skyhaul::Vec2> from, to;
      for (const auto& [id, u] : before.uavs)
        if (u.role == skyhaul::Role::Relay) from[id] = skyhaul::to_xy(u.pos);
      for (const auto& [id, u] : after.uavs)
        if (u.role == skyhaul::Role::Relay) to[id] = skyhaul::to_xy(u.pos);
      if (from.size() != to.size())
        throw skyhaul::InfeasibleError("relay counts differ; pad with depot positions first");
      auto match = skyhaul::m2bm(from, to);
      std::vector<skyhaul::Move> moves;
      for (const auto& [a, b] : match.assignment) {
        double alt_from = before.uav(a).pos.altitude;
        double alt_to = after.uav(b).pos.altitude;
        moves.push_back({b,
                         {from.at(a).x, from.at(a).y, alt_from},
                         {to.at(b).x, to.at(b).y, alt_to}});
      }
      auto plan3 = skyhaul::build_plan(moves, mopt);
      nlohmann::ordered_json j;
      j["schema_version"] = skyhaul::kSchemaVersion;
      j["bottleneck_m"] = match.bottleneck;
      j["makespan_s"] = plan3.makespan();
      j["safe"] = skyhaul::verify_plan(plan3, mopt);
      auto& jm = j["moves"] = nlohmann::ordered_json::array();
      for (const auto& m : plan3.moves) {
        nlohmann::ordered_json o;
        o["id"] = m.id;
        o["from"] = {m.from.x, m.from.y, m.from.z};
        o["to"] = {m.to.x, m.to.y, m.to.z};
        o["color"] = plan3.colors.at(m.id);
        o["layer_alt"] = plan3.layer_alt.at(m.id);
        jm.push_back(o);
      }
      emit(out_path, j.dump(2) + "\n");
    } else if (*cmp_cmd) {
      if (algos.empty()) algos = {"skyhaul", "steiner-mst", "maxcap", "air-part", "min-drone"};
      std::vector<skyhaul::MetricsRow> rows;
      for (const auto& path : scenario_paths) {
        auto scn = load_scenario(path);
        for (const auto& algo : algos) rows.push_back(static_row(algo, scn));
      }
      emit(out_path, skyhaul::metrics_to_csv(rows));
    } else if (*gen_cmd) {
      auto model = load_model(model_path);
      auto scenarios = skyhaul::generate_zones(zones, apps, runs, seed, model);
      for (const auto& scn : scenarios)
        write_file(out_path + "/" + scn.id + ".json",
                   skyhaul::scenario_to_json(scn).dump(2) + "\n");
      std::cout << scenarios.size() << " scenarios written to " << out_path << "\n";
    } else if (*fit_cmd) {
      std::vector<skyhaul::AnchorSample> anchors =
          anchors_path.empty() ? skyhaul::default_anchor_table()
                               : skyhaul::anchors_from_json(
                                     parse_json(read_file(anchors_path), anchors_path));
      auto p = skyhaul::fit_params(anchors);
      emit(out_path, skyhaul::model_to_json(p).dump(2) + "\n");
    }
  } catch (const skyhaul::ParseError& e) {
    std::cerr << R"({"kind":"parse","error":")" << e.what() << "\"}\n";
    return kExitParse;
  } catch (const skyhaul::ScenarioInvalid& e) {
    std::cerr << R"({"kind":"parse","error":")" << e.what() << "\"}\n";
    return kExitParse;
  } catch (const skyhaul::InfeasibleError& e) {
    std::cerr << R"({"kind":"infeasible","error":")" << e.what() << "\"}\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << R"({"kind":"internal","error":")" << e.what() << "\"}\n";
    return kExitInternal;
  }
  return kExitOk;
}
