#include "quadsim/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "quadsim/scenario_io.hpp"
#include "quadsim/trace_io.hpp"

using namespace quadsim;

namespace {

std::string csv_of(const SimTrace& t) {
  std::ostringstream out;
  write_trace_csv(t, out);
  return out.str();
}

}  // namespace

TEST(WindForce, StepTiming) {
  DisturbanceProfile d;  // defaults: t0=25, 6 m/s, Cd=0.3, +x
  EXPECT_TRUE(wind_force(d, 24.999).isZero(0.0));
  const Vec3 f = wind_force(d, 25.0);
  EXPECT_DOUBLE_EQ(f[0], 1.8);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
}

TEST(WindForce, ZeroSpeedIsAlwaysZero) {
  DisturbanceProfile d;
  d.wind_speed = 0.0;
  for (double t : {0.0, 25.0, 100.0}) EXPECT_TRUE(wind_force(d, t).isZero(0.0));
}

TEST(WindForce, ProfileValidation) {
  DisturbanceProfile d;
  EXPECT_NO_THROW(d.validate());
  d.direction = Vec3(1.0, 1.0, 0.0);
  EXPECT_THROW(d.validate(), ConfigError);
  d.direction = Vec3::Zero();
  EXPECT_THROW(d.validate(), ConfigError);
  d = DisturbanceProfile{};
  d.drag_coeff = -0.1;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Rk4Step, ZeroRhsLeavesStateUnchanged) {
  const double y = 3.25;
  EXPECT_EQ(rk4_step(y, 0.0, 0.1, [](double, double) { return 0.0; }), y);
}

TEST(Rk4Step, ExponentialOracle) {
  const double y1 = rk4_step(1.0, 0.0, 0.1, [](double, double y) { return y; });
  EXPECT_NEAR(y1, std::exp(0.1), 1e-7);
}

TEST(Rk4Step, FreeFallKinematics) {
  Eigen::Vector2d y(0.0, 0.0);  // z, z_dot
  y = rk4_step(y, 0.0, 0.01, [](double, const Eigen::Vector2d& s) {
    return Eigen::Vector2d(s[1], -9.81);
  });
  EXPECT_DOUBLE_EQ(y[1], -0.0981);
  EXPECT_NEAR(y[0], -0.0004905, 1e-15);
}

TEST(Rk4Step, FourthOrderOnScalarProblem) {
  auto integrate = [](double h) {
    double y = 1.0;
    const long n = std::lround(1.0 / h);
    for (long i = 0; i < n; ++i)
      y = rk4_step(y, i * h, h, [](double, double v) { return v; });
    return std::abs(y - std::exp(1.0));
  };
  const double ratio = integrate(2e-3) / integrate(1e-3);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(RunScenario, StepCountExactness) {
  ScenarioConfig cfg = attitude_hold_scenario(State12{}, 1.0, 0.5);
  cfg.h = 1e-3;
  EXPECT_EQ(run_scenario(cfg).rows.size(), 501u);
  cfg.h = 2.5e-3;
  EXPECT_EQ(run_scenario(cfg).rows.size(), 201u);
}

TEST(RunScenario, RejectsBadGrids) {
  ScenarioConfig cfg = attitude_hold_scenario(State12{}, 1.0, 1.0);
  cfg.h = 0.02;
  EXPECT_THROW(run_scenario(cfg), ConfigError);
  cfg.h = 3e-4;  // 1.0 / 3e-4 is not a whole number of steps
  EXPECT_THROW(run_scenario(cfg), ConfigError);
  cfg.h = 1e-3;
  cfg.horizon = -1.0;
  EXPECT_THROW(run_scenario(cfg), ConfigError);
}

TEST(RunScenario, DeterministicReruns) {
  State12 init;
  init.phi() = 0.3;
  init.theta() = -0.2;
  ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 1.0);
  const SimTrace a = run_scenario(cfg, 42);
  const SimTrace b = run_scenario(cfg, 42);
  EXPECT_EQ(csv_of(a), csv_of(b));
}

TEST(RunScenario, ZeroDragDisturbanceChangesNothing) {
  State12 init;
  init.phi() = 0.2;
  ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 1.0);
  const std::string bare = csv_of(run_scenario(cfg));
  DisturbanceProfile d;
  d.start_time = 0.2;
  d.drag_coeff = 0.0;
  cfg.disturbance = d;
  EXPECT_EQ(csv_of(run_scenario(cfg)), bare);
}

TEST(RunScenario, HoverPersistence) {
  ScenarioConfig cfg;
  HoverTrajectory h{0.5, -0.25, 2.0, 0.0};
  cfg.trajectory = h;
  cfg.h = 1e-3;
  cfg.horizon = 10.0;
  cfg.initial_state.x() = h.x;
  cfg.initial_state.y() = h.y;
  cfg.initial_state.z() = h.z;
  const SimTrace trace = run_scenario(cfg);
  ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
  const State12& fin = trace.rows.back().state;
  EXPECT_NEAR(fin.x(), h.x, 1e-6);
  EXPECT_NEAR(fin.y(), h.y, 1e-6);
  EXPECT_NEAR(fin.z(), h.z, 1e-6);
}

TEST(RunScenario, LyapunovMonotoneFromPerturbedRoll) {
  State12 init;
  init.phi() = 0.3;
  init.z() = 1.0;
  const SimTrace trace = run_scenario(attitude_hold_scenario(init, 1.0, 5.0));
  ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
  for (size_t i = 1; i < trace.rows.size(); ++i)
    for (int k = 0; k < 4; ++k)
      EXPECT_LE((*trace.rows[i].lyapunov)[k].value,
                (*trace.rows[i - 1].lyapunov)[k].value + 1e-9);
}

TEST(RunScenario, ThrustSingularityTruncatesTrace) {
  State12 init;
  init.phi() = 89.999 * M_PI / 180.0;
  const SimTrace trace = run_scenario(attitude_hold_scenario(init, 1.0, 1.0));
  EXPECT_EQ(trace.meta.termination.status, RunStatus::kThrustSingularity);
  EXPECT_EQ(trace.rows.size(), 0u);
  EXPECT_EQ(trace.meta.termination.time, 0.0);
}

TEST(RunScenario, BlowupGuardTruncates) {
  State12 init;
  init.z_dot() = 5e6;  // screaming upward; z exceeds 1e6 within a step
  ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 1.0);
  const SimTrace trace = run_scenario(cfg);
  EXPECT_EQ(trace.meta.termination.status, RunStatus::kNumericalBlowup);
  EXPECT_LT(trace.rows.back().t, cfg.horizon);
}

TEST(RunScenario, PidRowsCarryNoLyapunovColumns) {
  ScenarioConfig cfg = attitude_hold_scenario(State12{}, 1.0, 0.1);
  cfg.controller = ControllerKind::kPid;
  const SimTrace trace = run_scenario(cfg);
  ASSERT_FALSE(trace.rows.empty());
  EXPECT_EQ(trace.meta.controller, "pid");
  EXPECT_FALSE(trace.rows.front().errors.has_value());
  EXPECT_FALSE(trace.rows.front().lyapunov.has_value());
}

TEST(RunScenario, StepHoldModeAlsoCompletes) {
  State12 init;
  init.theta() = 0.25;
  ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 5.0);
  cfg.control_update = ControlUpdate::kStep;
  const SimTrace trace = run_scenario(cfg);
  EXPECT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
  EXPECT_NEAR(trace.rows.back().state.theta(), 0.0, 1e-3);
}

// Even with the position loop saturated, the shaped attitude references the
// controllers see must respect the command limit (the shaper's damping >= 1
// keeps its peak gain at one).
TEST(RunScenario, ShapedReferencesRespectAttitudeLimit) {
  ScenarioConfig cfg;
  HoverTrajectory h{0.0, 0.0, 1.0, 0.0};
  cfg.trajectory = h;
  cfg.h = 1e-3;
  cfg.horizon = 8.0;
  cfg.initial_state.x() = 40.0;  // far from the hover point; outer loop saturates
  cfg.initial_state.y() = -25.0;
  cfg.initial_state.z() = 1.0;
  const SimTrace trace = run_scenario(cfg);
  ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
  const double lim = cfg.outer_loop.attitude_limit + 1e-9;
  bool saturated = false;
  for (const TraceRow& r : trace.rows) {
    EXPECT_LE(std::abs(r.reference[Channel::kPhi].value), lim);
    EXPECT_LE(std::abs(r.reference[Channel::kTheta].value), lim);
    saturated |= std::abs(r.reference[Channel::kTheta].value) >
                 0.99 * cfg.outer_loop.attitude_limit;
  }
  EXPECT_TRUE(saturated);  // the run actually exercised the clamp
}

TEST(RunScenario, ActuatorClampingBoundsInputs) {
  State12 init;
  init.phi() = 0.4;
  init.z() = 0.0;
  ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 2.0);
  cfg.actuators.enabled = true;
  cfg.actuators.u1_max = 21.0;
  cfg.actuators.torque_max = 0.05;
  const SimTrace trace = run_scenario(cfg);
  for (const TraceRow& r : trace.rows) {
    EXPECT_GE(r.input.u1, 0.0);
    EXPECT_LE(r.input.u1, 21.0);
    EXPECT_LE(std::abs(r.input.u2), 0.05);
  }
}
