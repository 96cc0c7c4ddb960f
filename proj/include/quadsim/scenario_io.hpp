#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "quadsim/errors.hpp"
#include "quadsim/simulation.hpp"

namespace quadsim {

using nlohmann::json;

inline json to_json(const PlantParams& p) {
  return {{"m", p.m},     {"g", p.g},     {"l", p.l},
          {"Ixx", p.Ixx}, {"Iyy", p.Iyy}, {"Izz", p.Izz}};
}

inline json to_json(const Trajectory& traj) {
  json j;
  if (const auto* h = std::get_if<HoverTrajectory>(&traj)) {
    j = {{"kind", "hover"}, {"x", h->x}, {"y", h->y}, {"z", h->z}, {"psi", h->psi}};
  } else if (const auto* s = std::get_if<StepTrajectory>(&traj)) {
    j = {{"kind", "step"},
         {"x", s->base.x}, {"y", s->base.y}, {"z", s->base.z}, {"psi", s->base.psi},
         {"channel", s->channel}, {"magnitude", s->magnitude}, {"time", s->time}};
  } else if (const auto* sp = std::get_if<SpiralTrajectory>(&traj)) {
    j = {{"kind", "spiral"},
         {"center_x", sp->center_x}, {"center_y", sp->center_y},
         {"radius", sp->radius}, {"angular_rate", sp->angular_rate},
         {"climb_rate", sp->climb_rate}, {"z0", sp->z0}, {"psi", sp->psi}};
  } else {
    const auto& w = std::get<WaypointTrajectory>(traj);
    j["kind"] = "waypoints";
    j["file"] = w.source_file;
  }
  return j;
}

inline json to_json(const ScenarioConfig& cfg) {
  json j;
  j["plant"] = to_json(cfg.plant);
  j["controller"] =
      cfg.controller == ControllerKind::kPid ? "pid" : "backstepping";
  j["backstepping"] = {{"c1", cfg.gains.c[0]}, {"c2", cfg.gains.c[1]},
                       {"c3", cfg.gains.c[2]}, {"c4", cfg.gains.c[3]},
                       {"c5", cfg.gains.c[4]}, {"c6", cfg.gains.c[5]},
                       {"c7", cfg.gains.c[6]}, {"c8", cfg.gains.c[7]}};
  const char* names[4] = {"phi", "theta", "psi", "z"};
  json pid;
  for (int k = 0; k < 4; ++k)
    pid[names[k]] = {{"kp", cfg.pid.channel[k].kp},
                     {"ki", cfg.pid.channel[k].ki},
                     {"kd", cfg.pid.channel[k].kd}};
  pid["integral_limit"] = cfg.pid.integral_limit;
  j["pid"] = pid;
  j["trajectory"] = to_json(cfg.trajectory);
  if (cfg.disturbance) {
    const auto& d = *cfg.disturbance;
    j["disturbance"] = {{"time", d.start_time},
                        {"wind_speed", d.wind_speed},
                        {"drag_coeff", d.drag_coeff},
                        {"direction", {d.direction[0], d.direction[1], d.direction[2]}}};
  }
  j["outer_loop"] = {{"enabled", cfg.outer_loop.enabled},
                     {"kp", cfg.outer_loop.kp},
                     {"kd", cfg.outer_loop.kd},
                     {"attitude_limit", cfg.outer_loop.attitude_limit},
                     {"shaper", {{"enabled", cfg.outer_loop.shaper.enabled},
                                 {"natural_freq", cfg.outer_loop.shaper.natural_freq},
                                 {"damping", cfg.outer_loop.shaper.damping}}}};
  j["integration"] = {{"h", cfg.h},
                      {"horizon", cfg.horizon},
                      {"control_update",
                       cfg.control_update == ControlUpdate::kStage ? "stage" : "step"}};
  j["initial_state"] = std::vector<double>(cfg.initial_state.v.data(),
                                           cfg.initial_state.v.data() + 12);
  j["actuators"] = {{"enabled", cfg.actuators.enabled},
                    {"u1_max", cfg.actuators.u1_max},
                    {"torque_max", cfg.actuators.torque_max}};
  j["singularity_tolerance"] = cfg.singularity_tol;
  return j;
}

namespace detail {

inline WaypointTrajectory load_waypoints_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open waypoint file: " + path);
  WaypointTrajectory w;
  w.source_file = path;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // skip a header row if present
    if (line.find_first_not_of(" \t") != std::string::npos &&
        !std::isdigit(static_cast<unsigned char>(
            line[line.find_first_not_of(" \t")])) &&
        line[line.find_first_not_of(" \t")] != '-' &&
        line[line.find_first_not_of(" \t")] != '+')
      continue;
    std::istringstream ss(line);
    WaypointTrajectory::Row r{};
    char comma;
    if (!(ss >> r.t >> comma >> r.x >> comma >> r.y >> comma >> r.z >> comma >> r.psi))
      throw IoError("malformed waypoint row: " + line);
    w.rows.push_back(r);
  }
  return w;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (j.contains(key)) return j.at(key).get<T>();
  return fallback;
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  try {
    if (j.contains("plant")) {
      const json& p = j.at("plant");
      cfg.plant.m = p.at("m").get<double>();
      cfg.plant.g = p.at("g").get<double>();
      cfg.plant.l = p.at("l").get<double>();
      cfg.plant.Ixx = p.at("Ixx").get<double>();
      cfg.plant.Iyy = p.at("Iyy").get<double>();
      cfg.plant.Izz = p.at("Izz").get<double>();
    }
    const std::string ctrl = detail::get_or<std::string>(j, "controller", "backstepping");
    if (ctrl == "pid") cfg.controller = ControllerKind::kPid;
    else if (ctrl == "backstepping") cfg.controller = ControllerKind::kBackstepping;
    else throw ConfigError("unknown controller: " + ctrl);

    if (j.contains("backstepping")) {
      const json& b = j.at("backstepping");
      const char* keys[8] = {"c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8"};
      for (int i = 0; i < 8; ++i)
        cfg.gains.c[i] = detail::get_or<double>(b, keys[i], cfg.gains.c[i]);
    }
    if (j.contains("pid")) {
      const json& p = j.at("pid");
      const char* names[4] = {"phi", "theta", "psi", "z"};
      for (int k = 0; k < 4; ++k)
        if (p.contains(names[k])) {
          const json& cj = p.at(names[k]);
          cfg.pid.channel[k].kp = detail::get_or<double>(cj, "kp", cfg.pid.channel[k].kp);
          cfg.pid.channel[k].ki = detail::get_or<double>(cj, "ki", cfg.pid.channel[k].ki);
          cfg.pid.channel[k].kd = detail::get_or<double>(cj, "kd", cfg.pid.channel[k].kd);
        }
      cfg.pid.integral_limit =
          detail::get_or<double>(p, "integral_limit", cfg.pid.integral_limit);
    }
    if (j.contains("trajectory")) {
      const json& t = j.at("trajectory");
      const std::string kind = t.at("kind").get<std::string>();
      if (kind == "hover") {
        HoverTrajectory h;
        h.x = detail::get_or<double>(t, "x", 0.0);
        h.y = detail::get_or<double>(t, "y", 0.0);
        h.z = detail::get_or<double>(t, "z", 1.0);
        h.psi = detail::get_or<double>(t, "psi", 0.0);
        cfg.trajectory = h;
      } else if (kind == "step") {
        StepTrajectory s;
        s.base.x = detail::get_or<double>(t, "x", 0.0);
        s.base.y = detail::get_or<double>(t, "y", 0.0);
        s.base.z = detail::get_or<double>(t, "z", 1.0);
        s.base.psi = detail::get_or<double>(t, "psi", 0.0);
        s.channel = detail::get_or<std::string>(t, "channel", "x");
        s.magnitude = detail::get_or<double>(t, "magnitude", 1.0);
        s.time = detail::get_or<double>(t, "time", 1.0);
        cfg.trajectory = s;
      } else if (kind == "spiral") {
        SpiralTrajectory sp;
        sp.center_x = detail::get_or<double>(t, "center_x", 0.0);
        sp.center_y = detail::get_or<double>(t, "center_y", 0.0);
        sp.radius = detail::get_or<double>(t, "radius", 1.0);
        sp.angular_rate = detail::get_or<double>(t, "angular_rate", 0.5);
        sp.climb_rate = detail::get_or<double>(t, "climb_rate", 0.1);
        sp.z0 = detail::get_or<double>(t, "z0", 0.0);
        sp.psi = detail::get_or<double>(t, "psi", 0.0);
        cfg.trajectory = sp;
      } else if (kind == "waypoints") {
        cfg.trajectory = detail::load_waypoints_csv(t.at("file").get<std::string>());
      } else {
        throw ConfigError("unknown trajectory kind: " + kind);
      }
    }
    if (j.contains("disturbance") && !j.at("disturbance").is_null()) {
      const json& d = j.at("disturbance");
      DisturbanceProfile dp;
      dp.start_time = detail::get_or<double>(d, "time", dp.start_time);
      dp.wind_speed = detail::get_or<double>(d, "wind_speed", dp.wind_speed);
      dp.drag_coeff = detail::get_or<double>(d, "drag_coeff", dp.drag_coeff);
      if (d.contains("direction")) {
        const auto v = d.at("direction").get<std::vector<double>>();
        if (v.size() != 3) throw ConfigError("direction needs three components");
        dp.direction = Vec3(v[0], v[1], v[2]);
      }
      if (!(dp.direction.norm() > 0.0))
        throw ConfigError("disturbance direction must be nonzero");
      dp.direction.normalize();
      cfg.disturbance = dp;
    }
    if (j.contains("outer_loop")) {
      const json& o = j.at("outer_loop");
      cfg.outer_loop.enabled = detail::get_or<bool>(o, "enabled", true);
      cfg.outer_loop.kp = detail::get_or<double>(o, "kp", cfg.outer_loop.kp);
      cfg.outer_loop.kd = detail::get_or<double>(o, "kd", cfg.outer_loop.kd);
      cfg.outer_loop.attitude_limit =
          detail::get_or<double>(o, "attitude_limit", cfg.outer_loop.attitude_limit);
      if (o.contains("shaper")) {
        const json& s = o.at("shaper");
        cfg.outer_loop.shaper.enabled = detail::get_or<bool>(s, "enabled", true);
        cfg.outer_loop.shaper.natural_freq =
            detail::get_or<double>(s, "natural_freq", cfg.outer_loop.shaper.natural_freq);
        cfg.outer_loop.shaper.damping =
            detail::get_or<double>(s, "damping", cfg.outer_loop.shaper.damping);
      }
    }
    if (j.contains("integration")) {
      const json& i = j.at("integration");
      cfg.h = detail::get_or<double>(i, "h", cfg.h);
      cfg.horizon = detail::get_or<double>(i, "horizon", cfg.horizon);
      const std::string m = detail::get_or<std::string>(i, "control_update", "stage");
      if (m == "stage") cfg.control_update = ControlUpdate::kStage;
      else if (m == "step") cfg.control_update = ControlUpdate::kStep;
      else throw ConfigError("control_update must be 'stage' or 'step'");
    }
    if (j.contains("initial_state")) {
      const auto v = j.at("initial_state").get<std::vector<double>>();
      if (v.size() != 12) throw ConfigError("initial_state needs 12 components");
      for (int i = 0; i < 12; ++i) cfg.initial_state.v[i] = v[i];
    }
    if (j.contains("actuators")) {
      const json& a = j.at("actuators");
      cfg.actuators.enabled = detail::get_or<bool>(a, "enabled", false);
      cfg.actuators.u1_max = detail::get_or<double>(a, "u1_max", cfg.actuators.u1_max);
      cfg.actuators.torque_max =
          detail::get_or<double>(a, "torque_max", cfg.actuators.torque_max);
    }
    cfg.singularity_tol =
        detail::get_or<double>(j, "singularity_tolerance", cfg.singularity_tol);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << to_json(cfg).dump(2) << "\n";
}

/// Stable hash of the canonical serialized scenario; recorded in traces so
/// analysis can tell which configuration produced them.
inline std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  return detail::fnv1a(to_json(cfg).dump());
}

/// The reference comparison scenario: Table-1 plant, spiral trajectory,
/// step wind of 6 m/s along +x at t = 25 s, 50 s horizon, millisecond step.
/// The initial state sits on the spiral so the pre-disturbance segment is
/// steady tracking.
inline ScenarioConfig reference_scenario() {
  ScenarioConfig cfg;
  cfg.plant = PlantParams{};  // Table-1 values are the defaults
  cfg.controller = ControllerKind::kBackstepping;
  SpiralTrajectory sp;
  cfg.trajectory = sp;
  DisturbanceProfile d;
  cfg.disturbance = d;
  cfg.h = 1e-3;
  cfg.horizon = 50.0;
  cfg.initial_state.x() = sp.radius;
  cfg.initial_state.y_dot() = sp.radius * sp.angular_rate;
  cfg.initial_state.z_dot() = sp.climb_rate;
  return cfg;
}

/// Convenience for verification studies: stabilize a perturbed attitude and
/// an altitude offset toward level hover, position loop off.
inline ScenarioConfig attitude_hold_scenario(const State12& initial,
                                             double z_target = 1.0,
                                             double horizon = 10.0) {
  ScenarioConfig cfg;
  HoverTrajectory h;
  h.z = z_target;
  cfg.trajectory = h;
  cfg.outer_loop.enabled = false;
  cfg.disturbance.reset();
  cfg.h = 1e-3;
  cfg.horizon = horizon;
  cfg.initial_state = initial;
  return cfg;
}

}  // namespace quadsim
