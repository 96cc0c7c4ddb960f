// Acceptance suite: one test per criterion, each printing a [PASS]/[FAIL]
// line so the run log reads as a checklist.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "quadsim/quadsim.hpp"

using namespace quadsim;
namespace fs = std::filesystem;

namespace {

struct CriterionReporter {
  const char* name;
  explicit CriterionReporter(const char* n) : name(n) {}
  ~CriterionReporter() {
    const bool ok = !::testing::Test::HasFailure();
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    std::fflush(stdout);
  }
};

State12 random_hover_offset(std::mt19937& rng) {
  std::uniform_real_distribution<double> half(-0.5, 0.5);
  std::uniform_real_distribution<double> one(-1.0, 1.0);
  State12 s;
  s.phi() = half(rng);
  s.theta() = half(rng);
  s.psi() = one(rng);
  s.z() = 1.0 + one(rng);  // target altitude is 1
  return s;
}

double settle_or_inf(const ChannelMetrics& m) {
  return m.settling_time ? *m.settling_time : 1e300;
}

}  // namespace

// 1. Central-difference dV/dt matches the analytical derivative within 1e-3
//    relative (1e-9 absolute floor) and V is monotone within 1e-9, on 20
//    randomized undisturbed stabilization runs.
TEST(Acceptance, Criterion1LyapunovExactness) {
  CriterionReporter rep(
      "criterion 1: Lyapunov derivative exactness and monotonicity (20 runs)");
  std::mt19937 rng(2024);
  for (int run = 0; run < 20; ++run) {
    const ScenarioConfig cfg =
        attitude_hold_scenario(random_hover_offset(rng), 1.0, 10.0);
    const SimTrace trace = run_scenario(cfg);
    ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
    const LyapunovReport r = verify_lyapunov(trace, cfg.gains);
    for (int k = 0; k < 4; ++k) {
      EXPECT_LE(r.subsystems[k].max_rel_mismatch, 1e-3)
          << "run " << run << " subsystem " << k;
      EXPECT_LE(r.subsystems[k].max_monotonicity_violation, 1e-9)
          << "run " << run << " subsystem " << k;
    }
  }
}

// 2. Same runs: every error magnitude is below 1e-3 by t = 10 s.
TEST(Acceptance, Criterion2AsymptoticTracking) {
  CriterionReporter rep("criterion 2: all |e_i| < 1e-3 by t = 10 s");
  std::mt19937 rng(2024);  // same run family as criterion 1
  for (int run = 0; run < 20; ++run) {
    const ScenarioConfig cfg =
        attitude_hold_scenario(random_hover_offset(rng), 1.0, 10.0);
    const SimTrace trace = run_scenario(cfg);
    ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
    const BacksteppingErrors& e = *trace.rows.back().errors;
    for (int i = 0; i < 8; ++i)
      EXPECT_LT(std::abs(e.e[i]), 1e-3) << "run " << run << " e" << (i + 1);
  }
}

// 3. Reference scenario, backstepping: every controlled channel re-enters its
//    settling band within 10 s of the wind step.
TEST(Acceptance, Criterion3DisturbanceRecovery) {
  CriterionReporter rep(
      "criterion 3: backstepping recovers within 10 s of the wind step");
  const ScenarioConfig cfg = reference_scenario();
  const SimTrace trace = run_scenario(cfg, scenario_hash(cfg));
  ASSERT_EQ(trace.meta.termination.status, RunStatus::kCompleted);
  const Metrics m = compute_metrics(trace, cfg.disturbance->start_time);
  for (int ch = 2; ch < kMetricChannels; ++ch) {  // z, phi, theta, psi
    ASSERT_TRUE(m.channels[ch].settling_time.has_value())
        << kMetricChannelName[ch] << " never settled";
    EXPECT_LE(*m.channels[ch].settling_time, 10.0) << kMetricChannelName[ch];
  }
}

// 4. Identical scenario under both controllers: backstepping settles faster
//    and tracks tighter after the disturbance on the wind-driven pitch
//    channel (a PID that never settles satisfies the inequality).
TEST(Acceptance, Criterion4BacksteppingBeatsPid) {
  CriterionReporter rep(
      "criterion 4: backstepping beats PID on settling and post-step RMSE");
  ScenarioConfig a = reference_scenario();
  ScenarioConfig b = a;
  b.controller = ControllerKind::kPid;
  const ComparisonResult r = compare_scenarios(a, b);
  ASSERT_EQ(r.trace_a.meta.termination.status, RunStatus::kCompleted);
  ASSERT_EQ(r.trace_b.meta.termination.status, RunStatus::kCompleted);
  const ChannelMetrics& bs = r.metrics_a.channels[4];   // theta
  const ChannelMetrics& pid = r.metrics_b.channels[4];
  EXPECT_LT(settle_or_inf(bs), settle_or_inf(pid));
  EXPECT_LT(bs.rmse_after_onset, pid.rmse_after_onset);
}

// 5. The implemented translational rows equal the rotation-matrix product
//    form on 1000 random states and inputs, to 1e-12.
TEST(Acceptance, Criterion5DynamicsOracle) {
  CriterionReporter rep("criterion 5: translational rows match R*[0,0,u1]/m - g");
  const PlantParams p;
  const DerivedCoeffs c = derive_coeffs(p);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ang(-1.2, 1.2);
  std::uniform_real_distribution<double> rate(-4.0, 4.0);
  std::uniform_real_distribution<double> thrust(0.0, 40.0);
  std::uniform_real_distribution<double> moment(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    State12 s;
    s.phi() = ang(rng);
    s.theta() = ang(rng);
    s.psi() = 2.5 * ang(rng);
    s.phi_dot() = rate(rng);
    s.theta_dot() = rate(rng);
    s.psi_dot() = rate(rng);
    const ControlInput u{thrust(rng), moment(rng), moment(rng), moment(rng)};
    const State12 d = state_derivative(s, u, c, p.g);
    const Vec3 oracle =
        (1.0 / p.m) * (rotation_matrix(s.attitude()) * Vec3(0, 0, u.u1)) -
        Vec3(0, 0, p.g);
    EXPECT_NEAR(d.v[State12::kXDot], oracle[0], 1e-12);
    EXPECT_NEAR(d.v[State12::kYDot], oracle[1], 1e-12);
    EXPECT_NEAR(d.v[State12::kZDot], oracle[2], 1e-12);
  }
}

// 6. Constant hover thrust u1 = m g holds the zero state for 10 s.
TEST(Acceptance, Criterion6HoverEquilibrium) {
  CriterionReporter rep("criterion 6: u1 = m*g holds hover for 10 s");
  const PlantParams p;
  const DerivedCoeffs c = derive_coeffs(p);
  const ControlInput u{p.m * p.g, 0.0, 0.0, 0.0};
  Vec12 s = Vec12::Zero();
  const double h = 1e-3;
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    s = rk4_step(s, k * h, h, [&](double, const Vec12& v) {
      State12 st;
      st.v = v;
      return Vec12(state_derivative(st, u, c, p.g).v);
    });
    worst = std::max(worst, s.cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-6);
}

// 7. Halving h from 2e-3 to 1e-3 shrinks the closed-loop state difference at
//    T = 5 s by a factor in [12, 20].
TEST(Acceptance, Criterion7IntegratorOrder) {
  CriterionReporter rep("criterion 7: RK4 error contraction factor in [12, 20]");
  State12 init;
  init.phi() = 0.5;
  init.theta() = -0.4;
  init.psi() = 1.0;
  auto final_state = [&](double h) {
    ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 5.0);
    cfg.h = h;
    const SimTrace t = run_scenario(cfg);
    EXPECT_EQ(t.meta.termination.status, RunStatus::kCompleted);
    return t.rows.back().state.v;
  };
  const Vec12 coarse = final_state(2e-3);
  const Vec12 mid = final_state(1e-3);
  const Vec12 fine = final_state(5e-4);
  const double d1 = (coarse - mid).cwiseAbs().maxCoeff();
  const double d2 = (mid - fine).cwiseAbs().maxCoeff();
  ASSERT_GT(d2, 0.0);
  const double ratio = d1 / d2;
  std::printf("    h-refinement contraction: %.3f (d1=%.3e, d2=%.3e)\n", ratio,
              d1, d2);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

// 8. A near-inverted initial roll terminates with the thrust-singularity
//    status and the CLI exits with code 3.
TEST(Acceptance, Criterion8SingularityHandling) {
  CriterionReporter rep(
      "criterion 8: 89.999 deg roll ends in thrust_singularity, exit code 3");
  State12 init;
  init.phi() = 89.999 * M_PI / 180.0;
  const ScenarioConfig cfg = attitude_hold_scenario(init, 1.0, 1.0);
  const SimTrace trace = run_scenario(cfg);
  EXPECT_EQ(trace.meta.termination.status, RunStatus::kThrustSingularity);

  const char* cli = std::getenv("QUADSIM_CLI");
  ASSERT_NE(cli, nullptr) << "QUADSIM_CLI not set";
  const fs::path dir = fs::temp_directory_path() / "quadsim_acceptance";
  fs::create_directories(dir);
  const fs::path scn = dir / "singular.json";
  save_scenario(cfg, scn.string());
  const int rc = std::system(
      (std::string(cli) + " run --scenario " + scn.string() + " --quiet > /dev/null 2>&1")
          .c_str());
  EXPECT_EQ(WEXITSTATUS(rc), 3);
}
