#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadsim/backstepping.hpp"
#include "quadsim/dynamics.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/guidance.hpp"
#include "quadsim/pid.hpp"
#include "quadsim/reference.hpp"

namespace quadsim {

/// Step wind disturbance: zero before start_time, then a constant force
/// drag_coeff * wind_speed along the (unit) direction.
struct DisturbanceProfile {
  double start_time = 25.0;  // s
  double wind_speed = 6.0;   // m/s
  double drag_coeff = 0.3;   // N s/m
  Vec3 direction{1.0, 0.0, 0.0};

  void validate() const {
    if (start_time < 0.0) throw ConfigError("disturbance start time must be >= 0");
    if (wind_speed < 0.0) throw ConfigError("wind speed must be >= 0");
    if (drag_coeff < 0.0) throw ConfigError("drag coefficient must be >= 0");
    if (!(direction.norm() > 0.0))
      throw ConfigError("disturbance direction must be nonzero");
    if (std::abs(direction.norm() - 1.0) > 1e-12)
      throw ConfigError("disturbance direction must be unit length");
  }
};

inline Vec3 wind_force(const DisturbanceProfile& p, double t) {
  if (t < p.start_time) return Vec3::Zero();
  return p.drag_coeff * p.wind_speed * p.direction;
}

/// Classical fixed-step 4-stage Runge-Kutta update. State needs +, scalar *;
/// rhs is f(t, state) -> state derivative.
template <class State, class Rhs>
State rk4_step(const State& y, double t, double h, Rhs&& f) {
  const State k1 = f(t, y);
  const State k2 = f(t + h / 2, State(y + (h / 2) * k1));
  const State k3 = f(t + h / 2, State(y + (h / 2) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return State(y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4));
}

enum class ControllerKind { kBackstepping, kPid };

/// When kStage, the controller is re-evaluated at every RK4 stage point
/// (clean for checking the continuous-time Lyapunov identity); kStep holds
/// the step-start control across the stages. The PID is a discrete law and
/// always runs in kStep fashion.
enum class ControlUpdate { kStage, kStep };

struct ActuatorLimits {
  bool enabled = false;
  double u1_max = 40.0;     // N
  double torque_max = 5.0;  // N m
};

struct ScenarioConfig {
  PlantParams plant;
  ControllerKind controller = ControllerKind::kBackstepping;
  Gains gains;
  PidGains pid;
  Trajectory trajectory = SpiralTrajectory{};
  std::optional<DisturbanceProfile> disturbance;
  OuterLoopConfig outer_loop;
  double h = 1e-3;         // s
  double horizon = 50.0;   // s
  ControlUpdate control_update = ControlUpdate::kStage;
  State12 initial_state;
  ActuatorLimits actuators;
  double singularity_tol = 1e-3;
};

inline long validated_step_count(double h, double horizon) {
  if (!(h > 0.0) || h > 0.01)
    throw ConfigError("integration step must satisfy 0 < h <= 0.01");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  const long n = std::lround(horizon / h);
  if (n < 1 || std::abs(n * h - horizon) > 1e-9 * std::max(1.0, horizon))
    throw ConfigError("horizon must be a whole number of steps");
  return n;
}

inline void validate(const ScenarioConfig& cfg) {
  derive_coeffs(cfg.plant);  // positivity checks
  if (!(cfg.plant.g > 0.0) || !(cfg.plant.l > 0.0))
    throw ConfigError("gravity and arm length must be > 0");
  cfg.gains.validate();
  cfg.pid.validate();
  quadsim::validate(cfg.trajectory);
  if (cfg.disturbance) cfg.disturbance->validate();
  cfg.outer_loop.validate();
  validated_step_count(cfg.h, cfg.horizon);
  if (!cfg.initial_state.v.allFinite())
    throw ConfigError("initial state must be finite");
  if (!(cfg.singularity_tol > 0.0))
    throw ConfigError("singularity tolerance must be > 0");
}

enum class RunStatus { kCompleted, kThrustSingularity, kNumericalBlowup };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kThrustSingularity: return "thrust_singularity";
    default: return "numerical_blowup";
  }
}

struct Termination {
  RunStatus status = RunStatus::kCompleted;
  double time = 0.0;       // failure time for truncated runs
  std::string detail;
};

struct TraceRow {
  double t = 0.0;
  State12 state;
  ControlInput input;
  FullReference reference;
  std::optional<BacksteppingErrors> errors;
  std::optional<std::array<LyapunovValue, 4>> lyapunov;
  Vec3 disturbance_force = Vec3::Zero();
};

struct TraceMeta {
  std::string controller;  // "backstepping" or "pid"
  double h = 0.0;
  std::uint64_t scenario_hash = 0;
  std::array<double, 8> gains{};  // backstepping gains used for e/V columns
  Termination termination;
};

struct SimTrace {
  TraceMeta meta;
  std::vector<TraceRow> rows;
};

namespace detail {

// plant state plus the four reference-shaper states [phi_d, phi_d', th_d, th_d']
using AugState = Eigen::Matrix<double, 16, 1>;

struct Loop {
  const ScenarioConfig& cfg;
  DerivedCoeffs coeffs;
  DisturbanceProfile dist;  // normalized copy; zero force when absent
  bool has_dist = false;

  explicit Loop(const ScenarioConfig& c) : cfg(c), coeffs(derive_coeffs(c.plant)) {
    if (cfg.disturbance) {
      dist = *cfg.disturbance;
      dist.direction.normalize();
      has_dist = true;
    }
  }

  Vec3 force(double t) const {
    return has_dist ? wind_force(dist, t) : Vec3::Zero();
  }

  static State12 plant_part(const AugState& a) {
    State12 s;
    s.v = a.head<12>();
    return s;
  }

  AttitudeCommand raw_attitude(double t, const AugState& a) const {
    const TrajectoryPoint tp = eval_trajectory(cfg.trajectory, t);
    return position_outer_loop(plant_part(a), tp.x, tp.y, tp.psi.value,
                               cfg.outer_loop, cfg.plant.g);
  }

  FullReference references(double t, const AugState& a) const {
    const TrajectoryPoint tp = eval_trajectory(cfg.trajectory, t);
    FullReference ref;
    ref.x = tp.x;
    ref.y = tp.y;
    ref[Channel::kPsi] = tp.psi;
    ref[Channel::kZ] = tp.z;
    if (cfg.outer_loop.enabled) {
      const AttitudeCommand raw = position_outer_loop(
          plant_part(a), tp.x, tp.y, tp.psi.value, cfg.outer_loop, cfg.plant.g);
      if (cfg.outer_loop.shaper.enabled) {
        ref[Channel::kPhi] = {a[12], a[13],
                              shaper_accel(raw.phi, a[12], a[13], cfg.outer_loop.shaper)};
        ref[Channel::kTheta] = {a[14], a[15],
                                shaper_accel(raw.theta, a[14], a[15], cfg.outer_loop.shaper)};
      } else {
        ref[Channel::kPhi] = {raw.phi, 0.0, 0.0};
        ref[Channel::kTheta] = {raw.theta, 0.0, 0.0};
      }
    }
    return ref;
  }

  ControlInput clamp(ControlInput u) const {
    if (!cfg.actuators.enabled) return u;
    u.u1 = std::clamp(u.u1, 0.0, cfg.actuators.u1_max);
    u.u2 = std::clamp(u.u2, -cfg.actuators.torque_max, cfg.actuators.torque_max);
    u.u3 = std::clamp(u.u3, -cfg.actuators.torque_max, cfg.actuators.torque_max);
    u.u4 = std::clamp(u.u4, -cfg.actuators.torque_max, cfg.actuators.torque_max);
    return u;
  }

  ControlInput backstepping_control(double t, const AugState& a,
                                    const FullReference& ref) const {
    try {
      return clamp(control_laws(plant_part(a), ref, cfg.gains, coeffs,
                                cfg.plant.g, cfg.singularity_tol));
    } catch (const ThrustSingularityError& e) {
      throw ThrustSingularityError(e.cos_product, t);
    }
  }

  // Derivative of the augmented state. When `held` is set the control is
  // frozen (kStep mode and PID); otherwise it is recomputed here.
  AugState derivative(double t, const AugState& a,
                      const std::optional<ControlInput>& held) const {
    const FullReference ref = references(t, a);
    const ControlInput u = held ? *held : backstepping_control(t, a, ref);
    const State12 ds =
        state_derivative(plant_part(a), u, coeffs, cfg.plant.g, force(t) / cfg.plant.m);
    AugState d = AugState::Zero();
    d.head<12>() = ds.v;
    if (cfg.outer_loop.enabled && cfg.outer_loop.shaper.enabled) {
      const AttitudeCommand raw = raw_attitude(t, a);
      d[12] = a[13];
      d[13] = shaper_accel(raw.phi, a[12], a[13], cfg.outer_loop.shaper);
      d[14] = a[15];
      d[15] = shaper_accel(raw.theta, a[14], a[15], cfg.outer_loop.shaper);
    }
    return d;
  }
};

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

/// Integrates the closed loop from t = 0 to the horizon and records one row
/// per step. Controller failures (thrust singularity) and the blowup guard
/// truncate the trace and set the termination record instead of throwing.
inline SimTrace run_scenario(const ScenarioConfig& cfg,
                             std::uint64_t scenario_hash = 0) {
  validate(cfg);
  const long n = validated_step_count(cfg.h, cfg.horizon);
  detail::Loop loop(cfg);

  detail::AugState state = detail::AugState::Zero();
  state.head<12>() = cfg.initial_state.v;
  if (cfg.outer_loop.enabled && cfg.outer_loop.shaper.enabled) {
    const AttitudeCommand raw0 = loop.raw_attitude(0.0, state);
    state[12] = raw0.phi;
    state[14] = raw0.theta;
  }

  const bool is_pid = cfg.controller == ControllerKind::kPid;
  PidState pid_state;

  SimTrace trace;
  trace.meta.controller = is_pid ? "pid" : "backstepping";
  trace.meta.h = cfg.h;
  trace.meta.scenario_hash = scenario_hash;
  trace.meta.gains = cfg.gains.c;
  trace.rows.reserve(static_cast<size_t>(n) + 1);

  for (long k = 0; k <= n; ++k) {
    const double t = k * cfg.h;
    const FullReference ref = loop.references(t, state);

    ControlInput u;
    try {
      if (is_pid) {
        auto [uu, next] = pid_step(detail::Loop::plant_part(state), ref, cfg.pid,
                                   pid_state, cfg.h, cfg.plant, cfg.singularity_tol);
        u = loop.clamp(uu);
        pid_state = next;
      } else {
        u = loop.backstepping_control(t, state, ref);
      }
    } catch (const ThrustSingularityError& e) {
      trace.meta.termination = {RunStatus::kThrustSingularity,
                               e.time < 0.0 ? t : e.time, e.what()};
      return trace;
    }

    TraceRow row;
    row.t = t;
    row.state = detail::Loop::plant_part(state);
    row.input = u;
    row.reference = ref;
    row.disturbance_force = loop.force(t);
    if (!is_pid) {
      row.errors = compute_errors(row.state, ref, cfg.gains);
      row.lyapunov = lyapunov_values(*row.errors, cfg.gains);
    }
    trace.rows.push_back(std::move(row));
    if (k == n) break;

    const bool hold = is_pid || cfg.control_update == ControlUpdate::kStep;
    const std::optional<ControlInput> held =
        hold ? std::optional<ControlInput>(u) : std::nullopt;
    try {
      state = rk4_step(state, t, cfg.h,
                       [&](double tt, const detail::AugState& s) {
                         return loop.derivative(tt, s, held);
                       });
    } catch (const ThrustSingularityError& e) {
      trace.meta.termination = {RunStatus::kThrustSingularity, e.time, e.what()};
      return trace;
    }

    if (!state.allFinite() ||
        state.head<12>().cwiseAbs().maxCoeff() > 1e6) {
      trace.meta.termination = {RunStatus::kNumericalBlowup, t + cfg.h,
                               "state magnitude exceeded 1e6"};
      return trace;
    }
  }
  trace.meta.termination = {RunStatus::kCompleted, cfg.horizon, ""};
  return trace;
}

}  // namespace quadsim
