#pragma once

#include <array>
#include <cmath>

#include "quadsim/dynamics.hpp"
#include "quadsim/errors.hpp"
#include "quadsim/reference.hpp"

namespace quadsim {

/// The eight positive backstepping gains, two per channel.
struct Gains {
  std::array<double, 8> c{2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0};

  Gains() = default;
  explicit Gains(const std::array<double, 8>& values) : c(values) { validate(); }

  void validate() const {
    for (double ci : c)
      if (!(ci > 0.0) || !std::isfinite(ci))
        throw ConfigError("backstepping gains must all be strictly positive");
  }
};

/// Tracking errors e1, e3, e5, e7 and virtual-control errors e2, e4, e6, e8.
struct BacksteppingErrors {
  std::array<double, 8> e{};

  double tracking(Channel ch) const { return e[2 * static_cast<int>(ch)]; }
  double virtual_err(Channel ch) const { return e[2 * static_cast<int>(ch) + 1]; }
};

/// Augmented Lyapunov value of one channel pair and its analytical derivative.
/// value = e_i^2/2 + e_{i+1}^2/2; derivative = -c_i e_i^2 - c_{i+1} e_{i+1}^2.
struct LyapunovValue {
  double value = 0.0;
  double derivative = 0.0;
};

namespace detail {
// state index of the tracked component for each channel (phi, theta, psi, z)
inline constexpr int kChannelStateIndex[4] = {State12::kPhi, State12::kTheta,
                                              State12::kPsi, State12::kZ};
}  // namespace detail

/// Desired value of the next state in the chain: ref rate plus c_i * e_i.
inline double virtual_control(double e_i, double ref_rate, double c_i) {
  return ref_rate + c_i * e_i;
}

/// All eight error variables for the four channel pairs.
inline BacksteppingErrors compute_errors(const State12& s,
                                         const FullReference& refs,
                                         const Gains& gains) {
  BacksteppingErrors errs;
  for (int k = 0; k < 4; ++k) {
    const int i = detail::kChannelStateIndex[k];
    const ChannelReference& r = refs.channels[k];
    const double e_track = r.value - s.v[i];
    errs.e[2 * k] = e_track;
    errs.e[2 * k + 1] = s.v[i + 1] - virtual_control(e_track, r.rate, gains.c[2 * k]);
  }
  return errs;
}

/// The four control laws obtained from the equality case of the Lyapunov
/// bounding inequality. The rate-error derivative is the analytical
/// edot_i = ref_rate - x_{i+1}; it is never differenced numerically.
///
/// Throws ThrustSingularityError when |cos(phi) cos(theta)| is at or below
/// the tolerance (thrust direction nearly horizontal or inverted).
inline ControlInput control_laws(const State12& s, const FullReference& refs,
                                 const Gains& gains, const DerivedCoeffs& c,
                                 double g, double singularity_tol = 1e-3) {
  const BacksteppingErrors errs = compute_errors(s, refs, gains);

  auto edot = [&](int k) {
    return refs.channels[k].rate - s.v[detail::kChannelStateIndex[k] + 1];
  };

  ControlInput u;
  u.u2 = (1.0 / c.b1) * (refs.channels[0].accel + gains.c[0] * edot(0) -
                         c.a1 * s.theta_dot() * s.psi_dot() + errs.e[0] -
                         gains.c[1] * errs.e[1]);
  u.u3 = (1.0 / c.b2) * (refs.channels[1].accel + gains.c[2] * edot(1) -
                         c.a2 * s.phi_dot() * s.psi_dot() + errs.e[2] -
                         gains.c[3] * errs.e[3]);
  u.u4 = (1.0 / c.b3) * (refs.channels[2].accel + gains.c[4] * edot(2) -
                         c.a3 * s.phi_dot() * s.theta_dot() + errs.e[4] -
                         gains.c[5] * errs.e[5]);

  const double cos_product = std::cos(s.phi()) * std::cos(s.theta());
  if (std::abs(cos_product) <= singularity_tol)
    throw ThrustSingularityError(cos_product, -1.0);
  u.u1 = (1.0 / (c.b4 * cos_product)) *
         (refs.channels[3].accel + gains.c[6] * edot(3) + g + errs.e[6] -
          gains.c[7] * errs.e[7]);
  return u;
}

/// Per-channel augmented Lyapunov values and their analytical derivatives.
inline std::array<LyapunovValue, 4> lyapunov_values(
    const BacksteppingErrors& errs, const Gains& gains) {
  std::array<LyapunovValue, 4> out;
  for (int k = 0; k < 4; ++k) {
    const double ei = errs.e[2 * k], ej = errs.e[2 * k + 1];
    out[k].value = 0.5 * ei * ei + 0.5 * ej * ej;
    out[k].derivative = -gains.c[2 * k] * ei * ei - gains.c[2 * k + 1] * ej * ej;
  }
  return out;
}

}  // namespace quadsim
