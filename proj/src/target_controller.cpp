#include "spinal/target_controller.hpp"

namespace spinal::control {

using dynamics::KinematicSnapshot;

double hip_torque(const KinematicSnapshot& kin, const SwingTask& task,
                  const ControllerGains& gains, double tau_add) {
  return gains.k_p_alpha * (task.alpha_tgt - kin.alpha) - gains.k_d_alpha * kin.alpha_dot +
         tau_add;
}

double knee_phase1(const KinematicSnapshot& kin, const ControllerGains& gains) {
  return kin.alpha_dot <= 0.0 ? gains.k_i * kin.alpha_dot : 0.0;
}

double knee_phase2(const KinematicSnapshot& kin, double phi_k_dot, const SwingTask& task,
                   const ControllerGains& gains) {
  if (phi_k_dot <= 0.0) {
    return -gains.k_ii * phi_k_dot;
  }
  if (phi_k_dot > -kin.alpha_dot) {
    return -gains.k_ii * phi_k_dot * (kin.alpha - task.alpha_tgt) * (phi_k_dot + kin.alpha_dot);
  }
  return 0.0;
}

PhaseThreeOutput knee_phase3(const KinematicSnapshot& kin, const ControllerState& ctrl,
                             const SwingTask& task, const ControllerGains& gains,
                             const dynamics::LegParams& params) {
  PhaseThreeOutput out;
  out.state = ctrl;
  const double thr = task.alpha_thr(gains);
  if (kin.alpha <= thr && kin.alpha_dot < gains.alpha_dot_max) {
    out.tau_stop =
        -gains.k_stp * (thr - kin.alpha) * (1.0 - kin.alpha_dot / gains.alpha_dot_max);
  }
  out.tau_add_h = -2.0 * out.tau_stop;
  if (kin.alpha_dot >= 0.0) {
    out.state.extension_latched = true;
  }
  out.tau_k = out.tau_stop;
  if (out.state.extension_latched) {
    out.tau_k += gains.k_ext * (params.l_0 - kin.l);
  }
  return out;
}

ControllerState update_phase(const ControllerState& ctrl, const KinematicSnapshot& kin,
                             const SwingTask& task, const ControllerGains& gains,
                             const dynamics::LegParams& params) {
  ControllerState next = ctrl;
  if (next.phase == Phase::Flexion && kin.l <= params.l_0 - task.l_clr) {
    next.phase = Phase::Hold;
  }
  if (next.phase == Phase::Hold && kin.alpha <= task.alpha_thr(gains)) {
    next.phase = Phase::StopExtend;
  }
  return next;
}

ControllerState advance_events(const ControllerState& ctrl, const KinematicSnapshot& kin,
                               const SwingTask& task, const ControllerGains& gains,
                               const dynamics::LegParams& params) {
  ControllerState next = update_phase(ctrl, kin, task, gains, params);
  if (next.phase == Phase::StopExtend && kin.alpha_dot >= 0.0) {
    next.extension_latched = true;
  }
  if (next.phase == Phase::StopExtend && next.extension_latched && kin.foot_y <= task.ground_y) {
    next.contact = true;
  }
  return next;
}

dynamics::JointTorques policy_torques(const dynamics::LegState& state,
                                      const KinematicSnapshot& kin, const ControllerState& ctrl,
                                      const SwingTask& task, const ControllerGains& gains,
                                      const dynamics::LegParams& params) {
  dynamics::JointTorques torques;
  double tau_add = 0.0;
  switch (ctrl.phase) {
    case Phase::Flexion:
      torques.tau_k = knee_phase1(kin, gains);
      break;
    case Phase::Hold:
      torques.tau_k = knee_phase2(kin, state.phi_k_dot, task, gains);
      break;
    case Phase::StopExtend: {
      const auto p3 = knee_phase3(kin, ctrl, task, gains, params);
      torques.tau_k = p3.tau_k;
      tau_add = p3.tau_add_h;
      break;
    }
  }
  torques.tau_h = hip_torque(kin, task, gains, tau_add);
  return torques;
}

ControlOutput control_step(const dynamics::LegState& state, const ControllerState& ctrl,
                           const SwingTask& task, const ControllerGains& gains,
                           const dynamics::LegParams& params) {
  ControlOutput out;
  out.kin = dynamics::kinematics(state, params);
  out.state = advance_events(ctrl, out.kin, task, gains, params);
  out.torques = policy_torques(state, out.kin, out.state, task, gains, params);
  return out;
}

}  // namespace spinal::control
