#include "quadsim/guidance.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace quadsim;

TEST(Trajectory, HoverIsConstant) {
  HoverTrajectory h{0.0, 0.0, 1.0, 0.0};
  for (double t : {0.0, 3.7, 100.0}) {
    const TrajectoryPoint p = eval_trajectory(h, t);
    EXPECT_EQ(p.x.value, 0.0);
    EXPECT_EQ(p.z.value, 1.0);
    EXPECT_EQ(p.x.rate, 0.0);
    EXPECT_EQ(p.z.accel, 0.0);
  }
}

TEST(Trajectory, SpiralClosedFormAtZero) {
  SpiralTrajectory sp;
  sp.radius = 1.0;
  sp.angular_rate = 0.5;
  sp.climb_rate = 0.1;
  const TrajectoryPoint p = eval_trajectory(Trajectory{sp}, 0.0);
  EXPECT_DOUBLE_EQ(p.x.value, 1.0);
  EXPECT_DOUBLE_EQ(p.y.value, 0.0);
  EXPECT_DOUBLE_EQ(p.z.value, 0.0);
  EXPECT_DOUBLE_EQ(p.x.rate, 0.0);
  EXPECT_DOUBLE_EQ(p.y.rate, 0.5);
  EXPECT_DOUBLE_EQ(p.z.rate, 0.1);
  EXPECT_DOUBLE_EQ(p.x.accel, -0.25);
  EXPECT_DOUBLE_EQ(p.y.accel, 0.0);
  EXPECT_DOUBLE_EQ(p.z.accel, 0.0);
}

TEST(Trajectory, SpiralPeriodicity) {
  SpiralTrajectory sp;
  const double period = 2 * M_PI / sp.angular_rate;
  const TrajectoryPoint a = eval_trajectory(Trajectory{sp}, 0.0);
  const TrajectoryPoint b = eval_trajectory(Trajectory{sp}, period);
  EXPECT_NEAR(a.x.value, b.x.value, 1e-9);
  EXPECT_NEAR(a.y.value, b.y.value, 1e-9);
  EXPECT_NEAR(b.z.value - a.z.value, sp.climb_rate * period, 1e-9);
}

TEST(Trajectory, StepSwitchesAtTime) {
  StepTrajectory st;
  st.base = {0.0, 0.0, 1.0, 0.0};
  st.channel = "z";
  st.magnitude = 0.5;
  st.time = 2.0;
  EXPECT_EQ(eval_trajectory(Trajectory{st}, 1.999).z.value, 1.0);
  EXPECT_EQ(eval_trajectory(Trajectory{st}, 2.0).z.value, 1.5);
  EXPECT_EQ(eval_trajectory(Trajectory{st}, 2.0).z.rate, 0.0);
}

TEST(Trajectory, WaypointInterpolation) {
  WaypointTrajectory w;
  w.rows = {{0.0, 0.0, 0.0, 1.0, 0.0},
            {2.0, 4.0, -2.0, 1.0, 0.0},
            {4.0, 4.0, -2.0, 3.0, 1.0}};
  const Trajectory traj{w};
  const TrajectoryPoint mid = eval_trajectory(traj, 1.0);
  EXPECT_DOUBLE_EQ(mid.x.value, 2.0);
  EXPECT_DOUBLE_EQ(mid.x.rate, 2.0);
  EXPECT_DOUBLE_EQ(mid.y.value, -1.0);
  EXPECT_DOUBLE_EQ(mid.x.accel, 0.0);
  // held outside the table
  EXPECT_DOUBLE_EQ(eval_trajectory(traj, -1.0).x.value, 0.0);
  EXPECT_DOUBLE_EQ(eval_trajectory(traj, 9.0).z.value, 3.0);
  EXPECT_DOUBLE_EQ(eval_trajectory(traj, 9.0).z.rate, 0.0);
}

TEST(Trajectory, Validation) {
  SpiralTrajectory sp;
  sp.radius = 0.0;
  EXPECT_THROW(validate(Trajectory{sp}), ConfigError);
  sp.radius = 1.0;
  sp.angular_rate = 0.0;
  EXPECT_THROW(validate(Trajectory{sp}), ConfigError);
  StepTrajectory st;
  st.channel = "roll";
  EXPECT_THROW(validate(Trajectory{st}), ConfigError);
  WaypointTrajectory w;
  w.rows = {{0, 0, 0, 0, 0}};
  EXPECT_THROW(validate(Trajectory{w}), ConfigError);
}

// Trajectory rates/accels must match central differences of the evaluated
// values.
TEST(Trajectory, DerivativesMatchFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> time(0.1, 60.0);
  const double h = 1e-5;
  SpiralTrajectory sp;
  const Trajectory trajs[2] = {Trajectory{sp}, Trajectory{HoverTrajectory{}}};
  for (const Trajectory& traj : trajs) {
    for (int i = 0; i < 100; ++i) {
      const double t = time(rng);
      const TrajectoryPoint p = eval_trajectory(traj, t);
      const TrajectoryPoint lo = eval_trajectory(traj, t - h);
      const TrajectoryPoint hi = eval_trajectory(traj, t + h);
      auto check = [&](const ChannelReference& c, const ChannelReference& a,
                       const ChannelReference& b) {
        const double fd_rate = (b.value - a.value) / (2 * h);
        const double fd_accel = (b.rate - a.rate) / (2 * h);
        EXPECT_NEAR(c.rate, fd_rate, std::max(1e-6 * std::abs(c.rate), 1e-7));
        EXPECT_NEAR(c.accel, fd_accel, std::max(1e-6 * std::abs(c.accel), 1e-7));
      };
      check(p.x, lo.x, hi.x);
      check(p.y, lo.y, hi.y);
      check(p.z, lo.z, hi.z);
    }
  }
}

TEST(OuterLoop, ZeroErrorGivesLevelCommands) {
  const AttitudeCommand c = accel_to_attitude(0.0, 0.0, 0.7, 9.81, 0.5);
  EXPECT_EQ(c.phi, 0.0);
  EXPECT_EQ(c.theta, 0.0);
}

TEST(OuterLoop, SmallAngleInversionAndClamp) {
  const double g = 9.81;
  // a_y = -g at zero yaw asks for one radian of roll, clamped to 0.5
  AttitudeCommand c = accel_to_attitude(0.0, -g, 0.0, g, 0.5);
  EXPECT_DOUBLE_EQ(c.phi, 0.5);
  EXPECT_DOUBLE_EQ(c.theta, 0.0);
  // a_x = g asks for one radian of pitch
  c = accel_to_attitude(g, 0.0, 0.0, g, 0.5);
  EXPECT_DOUBLE_EQ(c.theta, 0.5);
  EXPECT_DOUBLE_EQ(c.phi, 0.0);
}

TEST(OuterLoop, YawEquivariance) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> acc(-15.0, 15.0);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  for (int i = 0; i < 200; ++i) {
    const double ax = acc(rng), ay = acc(rng);
    const double psi = ang(rng), alpha = ang(rng);
    const double axr = ax * std::cos(alpha) - ay * std::sin(alpha);
    const double ayr = ax * std::sin(alpha) + ay * std::cos(alpha);
    const AttitudeCommand base = accel_to_attitude(ax, ay, psi, 9.81, 0.5);
    const AttitudeCommand rot = accel_to_attitude(axr, ayr, psi + alpha, 9.81, 0.5);
    EXPECT_NEAR(base.phi, rot.phi, 1e-12);
    EXPECT_NEAR(base.theta, rot.theta, 1e-12);
  }
}

TEST(OuterLoop, CommandsAlwaysWithinLimit) {
  std::mt19937 rng(15);
  std::uniform_real_distribution<double> big(-100.0, 100.0);
  OuterLoopConfig cfg;
  for (int i = 0; i < 500; ++i) {
    State12 s;
    s.x() = big(rng);
    s.y() = big(rng);
    s.x_dot() = big(rng);
    s.y_dot() = big(rng);
    const AttitudeCommand c = position_outer_loop(
        s, ChannelReference{big(rng), 0, 0}, ChannelReference{big(rng), 0, 0},
        big(rng), cfg, 9.81);
    EXPECT_LE(std::abs(c.phi), cfg.attitude_limit);
    EXPECT_LE(std::abs(c.theta), cfg.attitude_limit);
  }
}

TEST(OuterLoop, ConfigValidation) {
  OuterLoopConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.shaper.damping = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = OuterLoopConfig{};
  cfg.attitude_limit = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ReferenceShaper, AccelPullsTowardRawCommand) {
  ReferenceShaperConfig cfg;
  // at rest away from the target the pull is wn^2 * offset
  EXPECT_DOUBLE_EQ(shaper_accel(0.3, 0.0, 0.0, cfg), 16.0 * 0.3);
  // at the target moving, pure damping
  EXPECT_DOUBLE_EQ(shaper_accel(0.0, 0.0, 1.0, cfg), -8.0);
}
