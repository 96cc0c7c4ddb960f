#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "quadsim/dynamics.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/reference.hpp"

namespace quadsim {

/// Desired x/y/z/psi motion at one instant.
struct TrajectoryPoint {
  ChannelReference x, y, z, psi;
};

struct HoverTrajectory {
  double x = 0.0, y = 0.0, z = 1.0, psi = 0.0;
};

/// Constant setpoint that jumps on one channel at a given time.
struct StepTrajectory {
  HoverTrajectory base;
  std::string channel = "x";  // x | y | z | psi
  double magnitude = 1.0;
  double time = 1.0;
};

struct SpiralTrajectory {
  double center_x = 0.0, center_y = 0.0;
  double radius = 1.0;        // m
  double angular_rate = 0.5;  // rad/s
  double climb_rate = 0.1;    // m/s
  double z0 = 0.0;
  double psi = 0.0;
};

/// Piecewise-linear table of (t, x, y, z, psi) rows; rates are segment
/// slopes, accelerations zero. Held constant outside the table's time span.
struct WaypointTrajectory {
  struct Row {
    double t, x, y, z, psi;
  };
  std::vector<Row> rows;
  std::string source_file;  // kept for round-tripping the scenario file
};

using Trajectory =
    std::variant<HoverTrajectory, StepTrajectory, SpiralTrajectory,
                 WaypointTrajectory>;

inline void validate(const Trajectory& traj) {
  if (const auto* s = std::get_if<SpiralTrajectory>(&traj)) {
    if (!(s->radius > 0.0)) throw ConfigError("spiral radius must be > 0");
    if (s->angular_rate == 0.0)
      throw ConfigError("spiral angular rate must be nonzero");
  } else if (const auto* st = std::get_if<StepTrajectory>(&traj)) {
    if (st->channel != "x" && st->channel != "y" && st->channel != "z" &&
        st->channel != "psi")
      throw ConfigError("step channel must be one of x, y, z, psi");
    if (st->time < 0.0) throw ConfigError("step time must be >= 0");
  } else if (const auto* w = std::get_if<WaypointTrajectory>(&traj)) {
    if (w->rows.size() < 2)
      throw ConfigError("waypoint table needs at least two rows");
    for (size_t i = 1; i < w->rows.size(); ++i)
      if (!(w->rows[i].t > w->rows[i - 1].t))
        throw ConfigError("waypoint times must be strictly increasing");
  }
}

inline TrajectoryPoint eval_trajectory(const Trajectory& traj, double t) {
  TrajectoryPoint p;
  if (const auto* h = std::get_if<HoverTrajectory>(&traj)) {
    p.x.value = h->x;
    p.y.value = h->y;
    p.z.value = h->z;
    p.psi.value = h->psi;
  } else if (const auto* s = std::get_if<StepTrajectory>(&traj)) {
    p.x.value = s->base.x;
    p.y.value = s->base.y;
    p.z.value = s->base.z;
    p.psi.value = s->base.psi;
    if (t >= s->time) {
      if (s->channel == "x") p.x.value += s->magnitude;
      else if (s->channel == "y") p.y.value += s->magnitude;
      else if (s->channel == "z") p.z.value += s->magnitude;
      else p.psi.value += s->magnitude;
    }
  } else if (const auto* sp = std::get_if<SpiralTrajectory>(&traj)) {
    const double w = sp->angular_rate, r = sp->radius;
    const double c = std::cos(w * t), s = std::sin(w * t);
    p.x = {sp->center_x + r * c, -r * w * s, -r * w * w * c};
    p.y = {sp->center_y + r * s, r * w * c, -r * w * w * s};
    p.z = {sp->z0 + sp->climb_rate * t, sp->climb_rate, 0.0};
    p.psi.value = sp->psi;
  } else {
    const auto& rows = std::get<WaypointTrajectory>(traj).rows;
    auto fill = [&](const WaypointTrajectory::Row& a,
                    const WaypointTrajectory::Row& b, double tt) {
      const double dt = b.t - a.t;
      const double f = (tt - a.t) / dt;
      p.x = {a.x + f * (b.x - a.x), (b.x - a.x) / dt, 0.0};
      p.y = {a.y + f * (b.y - a.y), (b.y - a.y) / dt, 0.0};
      p.z = {a.z + f * (b.z - a.z), (b.z - a.z) / dt, 0.0};
      p.psi = {a.psi + f * (b.psi - a.psi), (b.psi - a.psi) / dt, 0.0};
    };
    if (t <= rows.front().t) {
      const auto& r0 = rows.front();
      p.x.value = r0.x; p.y.value = r0.y; p.z.value = r0.z; p.psi.value = r0.psi;
    } else if (t >= rows.back().t) {
      const auto& rn = rows.back();
      p.x.value = rn.x; p.y.value = rn.y; p.z.value = rn.z; p.psi.value = rn.psi;
    } else {
      size_t i = 1;
      while (rows[i].t < t) ++i;
      fill(rows[i - 1], rows[i], t);
    }
  }
  return p;
}

/// Attitude commands produced by the position loop.
struct AttitudeCommand {
  double phi = 0.0;
  double theta = 0.0;
};

/// Second-order command filter applied to the raw attitude commands so the
/// controllers receive a consistent (value, rate, accel) reference triple.
/// damping >= 1 keeps the filter's peak gain at one, so the attitude-limit
/// clamp on the raw command bounds the filtered command too.
struct ReferenceShaperConfig {
  bool enabled = true;
  double natural_freq = 4.0;  // rad/s
  double damping = 1.0;
};

struct OuterLoopConfig {
  bool enabled = true;
  double kp = 1.0;            // 1/s^2
  double kd = 1.5;            // 1/s
  double attitude_limit = 0.5;  // rad, clamp on commanded roll/pitch
  ReferenceShaperConfig shaper;

  void validate() const {
    if (kp < 0.0 || kd < 0.0) throw ConfigError("outer loop gains must be >= 0");
    if (!(attitude_limit > 0.0))
      throw ConfigError("attitude command limit must be > 0");
    if (shaper.enabled) {
      if (!(shaper.natural_freq > 0.0))
        throw ConfigError("reference shaper natural frequency must be > 0");
      if (!(shaper.damping >= 1.0))
        throw ConfigError("reference shaper damping must be >= 1");
    }
  }
};

/// Small-angle inversion of commanded horizontal accelerations into
/// roll/pitch commands, clamped to the attitude limit.
inline AttitudeCommand accel_to_attitude(double ax, double ay, double psi,
                                         double g, double limit) {
  const double sp = std::sin(psi), cp = std::cos(psi);
  AttitudeCommand cmd;
  cmd.phi = std::clamp((ax * sp - ay * cp) / g, -limit, limit);
  cmd.theta = std::clamp((ax * cp + ay * sp) / g, -limit, limit);
  return cmd;
}

/// PD position loop with acceleration feedforward, then the small-angle
/// inversion. This closes the x/y loop around the four controlled channels
/// but is not one of them; the Lyapunov verification never covers it.
inline AttitudeCommand position_outer_loop(const State12& s,
                                           const ChannelReference& x_des,
                                           const ChannelReference& y_des,
                                           double psi, const OuterLoopConfig& cfg,
                                           double g) {
  const double ax = x_des.accel + cfg.kd * (x_des.rate - s.x_dot()) +
                    cfg.kp * (x_des.value - s.x());
  const double ay = y_des.accel + cfg.kd * (y_des.rate - s.y_dot()) +
                    cfg.kp * (y_des.value - s.y());
  return accel_to_attitude(ax, ay, psi, g, cfg.attitude_limit);
}

/// Acceleration of the shaper state toward the raw command.
inline double shaper_accel(double raw, double value, double rate,
                           const ReferenceShaperConfig& cfg) {
  const double wn = cfg.natural_freq;
  return wn * wn * (raw - value) - 2.0 * cfg.damping * wn * rate;
}

}  // namespace quadsim
