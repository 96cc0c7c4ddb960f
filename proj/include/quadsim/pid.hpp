#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "quadsim/dynamics.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/reference.hpp"

namespace quadsim {

/// Parallel-form gains for one channel, acceleration domain:
/// kp [1/s^2], ki [1/s^3], kd [1/s]. The channel output is an acceleration
/// command that pid_step scales into actuator units (moments via the inertia,
/// thrust via the mass).
struct PidChannelGains {
  double kp = 6.0;
  double ki = 1.0;
  double kd = 3.0;
};

struct PidGains {
  std::array<PidChannelGains, 4> channel{
      PidChannelGains{6.0, 1.0, 3.0},   // phi
      PidChannelGains{6.0, 1.0, 3.0},   // theta
      PidChannelGains{6.0, 1.0, 3.0},   // psi
      PidChannelGains{8.0, 2.0, 5.0}};  // z
  double integral_limit = 10.0;  // anti-windup clamp, error-seconds; <=0 disables

  void validate() const {
    for (const auto& g : channel)
      if (!(g.kp > 0.0) || g.ki < 0.0 || g.kd < 0.0)
        throw ConfigError("pid gains require kp > 0, ki >= 0, kd >= 0");
  }
};

/// Integral accumulators and previous errors, one per channel. Callers own
/// the state; pid_step never mutates its argument.
struct PidState {
  std::array<double, 4> integral{};
  std::array<double, 4> prev_error{};
};

inline PidState pid_reset(const PidState&) { return PidState{}; }

/// One discrete PID update over all four channels.
///
/// Derivative acts on the rate state (ref rate minus measured rate), not on a
/// differenced error. The integral accumulates by rectangle rule before the
/// output is formed and is clamped to the anti-windup limit. The altitude
/// channel adds the gravity feedforward m*g and divides by cos(phi)cos(theta)
/// under the same singularity guard the backstepping thrust law uses.
inline std::pair<ControlInput, PidState> pid_step(
    const State12& s, const FullReference& refs, const PidGains& gains,
    const PidState& state, double dt, const PlantParams& plant,
    double singularity_tol = 1e-3) {
  if (!(dt > 0.0)) throw ConfigError("pid_step requires dt > 0");

  static constexpr int kStateIndex[4] = {State12::kPhi, State12::kTheta,
                                         State12::kPsi, State12::kZ};
  PidState next = state;
  std::array<double, 4> out;
  for (int k = 0; k < 4; ++k) {
    const PidChannelGains& g = gains.channel[k];
    const ChannelReference& r = refs.channels[k];
    const double e = r.value - s.v[kStateIndex[k]];
    const double edot = r.rate - s.v[kStateIndex[k] + 1];
    double acc = next.integral[k] + e * dt;
    if (gains.integral_limit > 0.0)
      acc = std::clamp(acc, -gains.integral_limit, gains.integral_limit);
    next.integral[k] = acc;
    next.prev_error[k] = e;
    out[k] = g.kp * e + g.ki * acc + g.kd * edot;
  }

  const double cos_product = std::cos(s.phi()) * std::cos(s.theta());
  if (std::abs(cos_product) <= singularity_tol)
    throw ThrustSingularityError(cos_product, -1.0);

  ControlInput u;
  u.u1 = (plant.m * out[3] + plant.m * plant.g) / cos_product;
  u.u2 = plant.Ixx * out[0];
  u.u3 = plant.Iyy * out[1];
  u.u4 = plant.Izz * out[2];
  return {u, next};
}

}  // namespace quadsim
