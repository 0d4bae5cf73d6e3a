#pragma once

// Demonstration swing-leg controller: a hip leg-angle servo plus three knee
// policies (flexion, hold, stop/extend) sequenced by a one-way phase machine.

#include "spinal/dynamics.hpp"

#include <cstdint>

namespace spinal::control {

struct ControllerGains {
  double k_p_alpha = 110.0;   // N m / rad
  double k_d_alpha = 8.5;     // N m s / rad
  double k_i = 23.0;          // N m s / rad
  double k_ii = 4.0;          // N m s / rad
  double k_stp = 250.0;       // N m / rad
  double k_ext = 200.0;       // N m / m
  double alpha_dot_max = 10.0;                   // rad / s
  double delta_alpha_thr = dynamics::deg2rad(8.0);  // rad
};

struct SwingTask {
  double alpha_tgt = dynamics::deg2rad(70.0);
  double l_clr = 0.05;       // required shortening below l_0 (m)
  double ground_y = -1.0;    // foot height that counts as ground contact (m)

  double alpha_thr(const ControllerGains& gains) const {
    return alpha_tgt + gains.delta_alpha_thr;
  }
};

// Numbered to match the phase labels written to trajectory files.
enum class Phase : std::uint8_t { Flexion = 1, Hold = 2, StopExtend = 3 };

struct ControllerState {
  Phase phase = Phase::Flexion;
  bool extension_latched = false;
  bool contact = false;
};

struct PhaseThreeOutput {
  double tau_k = 0.0;
  double tau_add_h = 0.0;
  double tau_stop = 0.0;  // the stopping component alone
  ControllerState state;
};

struct ControlOutput {
  dynamics::JointTorques torques;
  ControllerState state;
  dynamics::KinematicSnapshot kin;
};

double hip_torque(const dynamics::KinematicSnapshot& kin, const SwingTask& task,
                  const ControllerGains& gains, double tau_add);

double knee_phase1(const dynamics::KinematicSnapshot& kin, const ControllerGains& gains);

/// Hold policy. The second branch applies while the knee extends
/// (phi_k_dot > 0) faster than the leg sweeps forward (phi_k_dot > -alpha_dot).
double knee_phase2(const dynamics::KinematicSnapshot& kin, double phi_k_dot,
                   const SwingTask& task, const ControllerGains& gains);

PhaseThreeOutput knee_phase3(const dynamics::KinematicSnapshot& kin, const ControllerState& ctrl,
                             const SwingTask& task, const ControllerGains& gains,
                             const dynamics::LegParams& params);

ControllerState update_phase(const ControllerState& ctrl, const dynamics::KinematicSnapshot& kin,
                             const SwingTask& task, const ControllerGains& gains,
                             const dynamics::LegParams& params);

/// Event bookkeeping shared by every torque source: phase transitions, the
/// extension latch (first StopExtend tick with alpha_dot >= 0), and ground
/// contact once latched with the foot at or below the task's ground height.
ControllerState advance_events(const ControllerState& ctrl, const dynamics::KinematicSnapshot& kin,
                               const SwingTask& task, const ControllerGains& gains,
                               const dynamics::LegParams& params);

/// Torques of the active policies for an already-advanced controller state.
dynamics::JointTorques policy_torques(const dynamics::LegState& state,
                                      const dynamics::KinematicSnapshot& kin,
                                      const ControllerState& ctrl, const SwingTask& task,
                                      const ControllerGains& gains,
                                      const dynamics::LegParams& params);

/// Kinematics, phase update, active knee policy, and hip composition for one
/// control tick. Contact is flagged once extension has latched and the foot
/// is at or below the task's ground height.
ControlOutput control_step(const dynamics::LegState& state, const ControllerState& ctrl,
                           const SwingTask& task, const ControllerGains& gains,
                           const dynamics::LegParams& params);

}  // namespace spinal::control
