#pragma once

// Planar double-pendulum swing leg: hip pinned at the origin, thigh and shank
// modelled as massless rods carrying point masses at their midpoints.
//
// Frame: x forward, y up. Absolute segment angles are measured from the
// forward horizontal and grow as the segment sweeps downward/backward, so a
// segment at angle theta points along (cos theta, -sin theta).
//
//   thigh angle  theta_t = phi_h - pi/2
//   shank angle  theta_s = theta_t + pi - phi_k
//   leg angle    alpha   = phi_h - phi_k/2
//
// phi_k is the interior knee angle (pi = fully extended).

#include <numbers>
#include <stdexcept>
#include <string>

namespace spinal::dynamics {

struct LegParams {
  double l_t = 0.5;   // thigh length (m)
  double l_s = 0.5;   // shank length (m)
  double m_t = 7.3;   // thigh point mass (kg)
  double m_s = 4.3;   // shank point mass (kg)
  double g = 9.81;    // gravity (m/s^2)
  double l_0 = 1.0;   // rest leg length, l_t + l_s (m)

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

struct LegState {
  double phi_h = std::numbers::pi;
  double phi_k = std::numbers::pi;
  double phi_h_dot = 0.0;
  double phi_k_dot = 0.0;
  double t = 0.0;

  bool finite() const;
};

struct JointTorques {
  double tau_h = 0.0;  // conjugate to phi_h
  double tau_k = 0.0;  // conjugate to phi_k
};

struct KinematicSnapshot {
  double alpha = 0.0;
  double alpha_dot = 0.0;
  double l = 0.0;
  double foot_x = 0.0;
  double foot_y = 0.0;
  double knee_x = 0.0;
  double knee_y = 0.0;
};

struct Accelerations {
  double phi_h_ddot = 0.0;
  double phi_k_ddot = 0.0;
};

/// Raised when a step produces a non-finite state or the mass matrix is
/// numerically singular. Neither happens for valid states.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

KinematicSnapshot kinematics(const LegState& state, const LegParams& params);

/// Equations of motion. Derived in absolute angles, where the point-mass
/// double pendulum is textbook, with generalized forces
/// Q_thigh = tau_h + tau_k and Q_shank = -tau_k from virtual work.
Accelerations accelerations(const LegState& state, const JointTorques& torques,
                            const LegParams& params);

/// One classical RK4 step with torques held constant over the step.
LegState integrate_step(const LegState& state, const JointTorques& torques,
                        const LegParams& params, double dt);

/// Kinetic plus potential energy; potential is zero at hip height.
double total_energy(const LegState& state, const LegParams& params);

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace spinal::dynamics
