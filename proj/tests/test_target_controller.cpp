#include "spinal/experiment.hpp"
#include "spinal/target_controller.hpp"

#include <gtest/gtest.h>

using namespace spinal;
using namespace spinal::control;
using dynamics::deg2rad;
using dynamics::KinematicSnapshot;

namespace {

KinematicSnapshot kin_at(double alpha, double alpha_dot, double l = 1.0) {
  KinematicSnapshot k;
  k.alpha = alpha;
  k.alpha_dot = alpha_dot;
  k.l = l;
  return k;
}

SwingTask task70() {
  SwingTask t;
  t.alpha_tgt = deg2rad(70);
  return t;
}

}  // namespace

TEST(HipTorque, TableGains) {
  const ControllerGains g;
  const SwingTask t = task70();
  EXPECT_EQ(hip_torque(kin_at(t.alpha_tgt, 0), t, g, 0.0), 0.0);
  EXPECT_NEAR(hip_torque(kin_at(t.alpha_tgt - 0.1, 0), t, g, 0.0), 11.0, 1e-12);
  EXPECT_NEAR(hip_torque(kin_at(t.alpha_tgt - 0.1, 1.0), t, g, 0.0), 2.5, 1e-12);
  EXPECT_NEAR(hip_torque(kin_at(t.alpha_tgt, 0), t, g, 7.0), 7.0, 1e-12);
}

TEST(KneePhase1, FlexesOnlyWhileSweepingForward) {
  const ControllerGains g;
  EXPECT_EQ(knee_phase1(kin_at(1, -1.0), g), -23.0);
  EXPECT_EQ(knee_phase1(kin_at(1, 0.5), g), 0.0);
  EXPECT_EQ(knee_phase1(kin_at(1, 0.0), g), 0.0);
}

TEST(KneePhase2, Branches) {
  const ControllerGains g;
  const SwingTask t = task70();
  EXPECT_EQ(knee_phase2(kin_at(1, 0), -1.0, t, g), 4.0);
  EXPECT_EQ(knee_phase2(kin_at(1, 0), 0.0, t, g), 0.0);
  EXPECT_NEAR(knee_phase2(kin_at(t.alpha_tgt + 0.2, -0.3), 0.5, t, g), -0.08, 1e-15);
  // Extending, but slower than the leg sweeps forward: no torque.
  EXPECT_EQ(knee_phase2(kin_at(t.alpha_tgt + 0.2, -0.8), 0.5, t, g), 0.0);
}

TEST(KneePhase3, StoppingAndCompensation) {
  const ControllerGains g;
  const SwingTask t = task70();
  const double thr = t.alpha_thr(g);
  const dynamics::LegParams p;

  auto at_thr = knee_phase3(kin_at(thr, -3.0), ControllerState{Phase::StopExtend}, t, g, p);
  EXPECT_EQ(at_thr.tau_stop, 0.0);
  EXPECT_EQ(at_thr.tau_add_h, 0.0);

  auto inside = knee_phase3(kin_at(thr - 0.1, -5.0), ControllerState{Phase::StopExtend}, t, g, p);
  EXPECT_NEAR(inside.tau_stop, -37.5, 1e-12);
  EXPECT_NEAR(inside.tau_add_h, 75.0, 1e-12);
  EXPECT_EQ(inside.tau_add_h, -2.0 * inside.tau_stop);
  EXPECT_FALSE(inside.state.extension_latched);
  EXPECT_EQ(inside.tau_k, inside.tau_stop);

  // Faster than alpha_dot_max: the stopping term switches off.
  auto fast = knee_phase3(kin_at(thr - 0.1, 11.0), ControllerState{Phase::StopExtend}, t, g, p);
  EXPECT_EQ(fast.tau_stop, 0.0);
}

TEST(KneePhase3, ExtensionLatch) {
  const ControllerGains g;
  const SwingTask t = task70();
  const dynamics::LegParams p;
  const double thr = t.alpha_thr(g);
  auto latching = knee_phase3(kin_at(thr + 0.05, 0.0, 0.9), ControllerState{Phase::StopExtend}, t, g, p);
  EXPECT_TRUE(latching.state.extension_latched);
  EXPECT_NEAR(latching.tau_k, 20.0, 1e-12);

  ControllerState latched{Phase::StopExtend, true, false};
  auto later = knee_phase3(kin_at(thr - 0.1, -5.0, 0.9), latched, t, g, p);
  EXPECT_TRUE(later.state.extension_latched);
  EXPECT_NEAR(later.tau_k, -37.5 + 20.0, 1e-12);
}

TEST(UpdatePhase, Transitions) {
  const ControllerGains g;
  const SwingTask t = task70();
  const dynamics::LegParams p;
  EXPECT_EQ(update_phase({}, kin_at(2.0, -1, 0.94), t, g, p).phase, Phase::Hold);
  EXPECT_EQ(update_phase({}, kin_at(2.0, -1, 0.96), t, g, p).phase, Phase::Flexion);
  EXPECT_EQ(update_phase({Phase::Hold}, kin_at(t.alpha_thr(g) - 0.01, -1, 0.9), t, g, p).phase,
            Phase::StopExtend);
  EXPECT_EQ(update_phase({Phase::Hold}, kin_at(2.0, -1, 1.0), t, g, p).phase, Phase::Hold);
  for (double a : {0.5, 1.5, 2.5}) {
    for (double l : {0.5, 0.99}) {
      EXPECT_EQ(update_phase({Phase::StopExtend}, kin_at(a, 1, l), t, g, p).phase, Phase::StopExtend);
    }
  }
}

TEST(ControlStep, InitialPaperState) {
  dynamics::LegState s;
  s.phi_h = deg2rad(220);
  s.phi_k = deg2rad(175);
  s.phi_h_dot = -2.0;
  s.phi_k_dot = -3.0;
  const ControllerGains g;
  const SwingTask t = task70();
  const auto out = control_step(s, {}, t, g, dynamics::LegParams{});
  EXPECT_EQ(out.state.phase, Phase::Flexion);
  EXPECT_EQ(out.torques.tau_k, knee_phase1(out.kin, g));
  EXPECT_EQ(out.torques.tau_h, hip_torque(out.kin, t, g, 0.0));
}

TEST(ControlStep, AtTargetAtRestIsSilent) {
  const SwingTask t = task70();
  dynamics::LegState s;
  s.phi_k = deg2rad(120);
  s.phi_h = t.alpha_tgt + s.phi_k / 2;
  const dynamics::LegParams p;
  const auto kin = dynamics::kinematics(s, p);
  const auto tau = policy_torques(s, kin, {Phase::Hold}, t, ControllerGains{}, p);
  EXPECT_NEAR(tau.tau_h, 0.0, 1e-12);
  EXPECT_EQ(tau.tau_k, 0.0);
  // A full control step also advances the phase: alpha_tgt is already past alpha_thr.
  EXPECT_EQ(control_step(s, {Phase::Hold}, t, ControllerGains{}, p).state.phase, Phase::StopExtend);
}

TEST(DemoRollout, PhaseSequenceAndInvariants) {
  experiment::SimulationConfig sim;
  const auto tasks = experiment::sample_tasks({}, 20, 1, sim.params);
  for (const auto& task : tasks) {
    const auto ep = experiment::run_demo_episode(task, sim);
    const auto& rows = ep.trajectory.rows;
    ASSERT_FALSE(rows.empty());
    EXPECT_TRUE(ep.outcome.contact);
    EXPECT_EQ(rows.front().phase, Phase::Flexion);
    EXPECT_EQ(rows.back().phase, Phase::StopExtend);
    bool saw_hold = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(static_cast<int>(rows[i].phase), static_cast<int>(rows[i - 1].phase));
      EXPECT_NEAR(rows[i].state.t - rows[i - 1].state.t, sim.dt, 1e-12);
      saw_hold |= rows[i].phase == Phase::Hold;
      // Hip compensation identity in the stop/extend phase.
      if (rows[i].phase == Phase::StopExtend) {
        const auto& k = rows[i].kin;
        const double stop =
            k.alpha <= task.task.alpha_thr(sim.gains) && k.alpha_dot < sim.gains.alpha_dot_max
                ? -sim.gains.k_stp * (task.task.alpha_thr(sim.gains) - k.alpha) *
                      (1.0 - k.alpha_dot / sim.gains.alpha_dot_max)
                : 0.0;
        EXPECT_NEAR(rows[i].torques.tau_h,
                    hip_torque(k, task.task, sim.gains, 0.0) - 2.0 * stop, 1e-9);
      }
    }
    EXPECT_TRUE(saw_hold);
  }
}

TEST(DemoRollout, ExtensionTermOnlyAfterLatch) {
  experiment::SimulationConfig sim;
  const auto task = experiment::sample_tasks({}, 1, 5, sim.params).front();
  dynamics::LegState s = task.init;
  ControllerState ctrl;
  bool latched = false;
  for (int i = 0; i < 2000 && !ctrl.contact; ++i) {
    const auto out = control_step(s, ctrl, task.task, sim.gains, sim.params);
    if (out.state.phase == Phase::StopExtend) {
      const auto p3 = knee_phase3(out.kin, out.state, task.task, sim.gains, sim.params);
      const double ext = out.torques.tau_k - p3.tau_stop;
      if (!latched && !out.state.extension_latched) {
        EXPECT_EQ(ext, 0.0);
      }
      if (out.state.extension_latched) {
        EXPECT_NEAR(ext, sim.gains.k_ext * (sim.params.l_0 - out.kin.l), 1e-12);
      }
    }
    EXPECT_FALSE(latched && !out.state.extension_latched);
    latched = out.state.extension_latched;
    ctrl = out.state;
    s = dynamics::integrate_step(s, out.torques, sim.params, sim.dt);
  }
  EXPECT_TRUE(latched);
}
