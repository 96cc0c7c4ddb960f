#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "quadsim/errors.hpp"

namespace quadsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Roll / pitch / yaw, ZYX convention, radians.
struct EulerAngles {
  double phi = 0.0;
  double theta = 0.0;
  double psi = 0.0;
};

/// The 12-component state of the rigid body.
///
/// Index mapping (fixed; the control laws index into it):
///   x1  = phi    (roll, rad)        x2  = phi_dot   (rad/s)
///   x3  = theta  (pitch, rad)       x4  = theta_dot (rad/s)
///   x5  = psi    (yaw, rad)         x6  = psi_dot   (rad/s)
///   x7  = z      (altitude, m)      x8  = z_dot     (m/s)
///   x9  = x      (m)                x10 = x_dot     (m/s)
///   x11 = y      (m)                x12 = y_dot     (m/s)
struct State12 {
  Vec12 v = Vec12::Zero();

  // zero-based component indices
  static constexpr int kPhi = 0, kPhiDot = 1;
  static constexpr int kTheta = 2, kThetaDot = 3;
  static constexpr int kPsi = 4, kPsiDot = 5;
  static constexpr int kZ = 6, kZDot = 7;
  static constexpr int kX = 8, kXDot = 9;
  static constexpr int kY = 10, kYDot = 11;

  double& phi() { return v[kPhi]; }
  double& phi_dot() { return v[kPhiDot]; }
  double& theta() { return v[kTheta]; }
  double& theta_dot() { return v[kThetaDot]; }
  double& psi() { return v[kPsi]; }
  double& psi_dot() { return v[kPsiDot]; }
  double& z() { return v[kZ]; }
  double& z_dot() { return v[kZDot]; }
  double& x() { return v[kX]; }
  double& x_dot() { return v[kXDot]; }
  double& y() { return v[kY]; }
  double& y_dot() { return v[kYDot]; }

  double phi() const { return v[kPhi]; }
  double phi_dot() const { return v[kPhiDot]; }
  double theta() const { return v[kTheta]; }
  double theta_dot() const { return v[kThetaDot]; }
  double psi() const { return v[kPsi]; }
  double psi_dot() const { return v[kPsiDot]; }
  double z() const { return v[kZ]; }
  double z_dot() const { return v[kZDot]; }
  double x() const { return v[kX]; }
  double x_dot() const { return v[kXDot]; }
  double y() const { return v[kY]; }
  double y_dot() const { return v[kYDot]; }

  EulerAngles attitude() const { return {phi(), theta(), psi()}; }
};

/// Physical plant parameters (mass, geometry, inertia diagonal).
struct PlantParams {
  double m = 2.0;      // mass, kg
  double g = 9.81;     // gravitational acceleration, m/s^2
  double l = 0.225;    // arm length, m
  double Ixx = 0.0035; // kg m^2
  double Iyy = 0.0035; // kg m^2
  double Izz = 0.0050; // kg m^2
};

/// Coefficients derived from PlantParams: gyroscopic coupling ratios a1..a3
/// and the inverse inertias / inverse mass b1..b4 the state-space model and
/// the control laws are written in.
struct DerivedCoeffs {
  double a1, a2, a3;
  double b1, b2, b3, b4;
};

/// Thrust (N) plus roll/pitch/yaw moments (N m).
struct ControlInput {
  double u1 = 0.0;  // total thrust
  double u2 = 0.0;  // roll moment
  double u3 = 0.0;  // pitch moment
  double u4 = 0.0;  // yaw moment
};

/// Body-to-inertial rotation matrix, ZYX convention: R = Rz(psi) Ry(theta) Rx(phi).
inline Mat3 rotation_matrix(const EulerAngles& att) {
  const double cp = std::cos(att.phi), sp = std::sin(att.phi);
  const double ct = std::cos(att.theta), st = std::sin(att.theta);
  const double cs = std::cos(att.psi), ss = std::sin(att.psi);
  Mat3 r;
  r << ct * cs, sp * st * cs - cp * ss, cp * st * cs + sp * ss,
       ct * ss, cp * cs + sp * st * ss, cp * st * ss - sp * cs,
       -st,     sp * ct,                cp * ct;
  return r;
}

inline DerivedCoeffs derive_coeffs(const PlantParams& p) {
  if (!(p.m > 0.0) || !(p.Ixx > 0.0) || !(p.Iyy > 0.0) || !(p.Izz > 0.0))
    throw ConfigError("plant parameters must have positive mass and inertias");
  DerivedCoeffs c;
  c.a1 = (p.Iyy - p.Izz) / p.Ixx;
  c.a2 = (p.Izz - p.Ixx) / p.Iyy;
  c.a3 = (p.Ixx - p.Iyy) / p.Izz;
  c.b1 = 1.0 / p.Ixx;
  c.b2 = 1.0 / p.Iyy;
  c.b3 = 1.0 / p.Izz;
  c.b4 = 1.0 / p.m;
  return c;
}

/// Exact kinematic map from body rates (p, q, r) to Euler-angle rates.
/// Provided for diagnostics; the state-space model identifies the two rate
/// sets (small-angle form), so this is not used inside the closed loop.
inline Vec3 euler_rate_transform(const EulerAngles& att, const Vec3& body_rates,
                                 double singularity_tol = 1e-6) {
  const double ct = std::cos(att.theta);
  if (std::abs(ct) <= singularity_tol) throw GimbalLockError(ct);
  const double cp = std::cos(att.phi), sp = std::sin(att.phi);
  const double tt = std::tan(att.theta);
  const double p = body_rates[0], q = body_rates[1], r = body_rates[2];
  return {p + r * cp * tt + q * sp * tt,
          q * cp - r * sp,
          r * cp / ct + q * sp / ct};
}

/// Time derivative of the 12-state model.
///
/// Rotational rows use the gyroscopic products a_i plus direct moment terms;
/// translational rows are thrust tilted through the rotation matrix minus
/// gravity. f_ext is an external inertial acceleration (force per unit mass)
/// added to the translational rows only.
inline State12 state_derivative(const State12& s, const ControlInput& u,
                                const DerivedCoeffs& c, double g,
                                const Vec3& f_ext = Vec3::Zero()) {
  const double cp = std::cos(s.phi()), sp = std::sin(s.phi());
  const double ct = std::cos(s.theta()), st = std::sin(s.theta());
  const double cs = std::cos(s.psi()), ss = std::sin(s.psi());

  State12 d;
  d.v[State12::kPhi] = s.phi_dot();
  d.v[State12::kPhiDot] = c.a1 * s.theta_dot() * s.psi_dot() + c.b1 * u.u2;
  d.v[State12::kTheta] = s.theta_dot();
  d.v[State12::kThetaDot] = c.a2 * s.phi_dot() * s.psi_dot() + c.b2 * u.u3;
  d.v[State12::kPsi] = s.psi_dot();
  d.v[State12::kPsiDot] = c.a3 * s.phi_dot() * s.theta_dot() + c.b3 * u.u4;
  d.v[State12::kZ] = s.z_dot();
  d.v[State12::kZDot] = -g + c.b4 * (cp * ct) * u.u1 + f_ext[2];
  d.v[State12::kX] = s.x_dot();
  d.v[State12::kXDot] = c.b4 * (cp * st * cs + sp * ss) * u.u1 + f_ext[0];
  d.v[State12::kY] = s.y_dot();
  d.v[State12::kYDot] = c.b4 * (cp * st * ss - sp * cs) * u.u1 + f_ext[1];
  return d;
}

}  // namespace quadsim
