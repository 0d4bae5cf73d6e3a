#include "spinal/dynamics.hpp"

#include <cmath>

namespace spinal::dynamics {

namespace {

constexpr double kPi = std::numbers::pi;

// Segment angles as deviations from hanging straight down (psi = theta - pi/2),
// so the equilibrium configuration maps to exact zeros:
// cos(theta) = -sin(psi), sin(theta) = cos(psi).
struct AbsoluteState {
  double psi1, psi2, w1, w2;
};

AbsoluteState to_absolute(const LegState& s) {
  const double psi1 = s.phi_h - kPi;
  const double psi2 = psi1 - (s.phi_k - kPi);
  return {psi1, psi2, s.phi_h_dot, s.phi_h_dot - s.phi_k_dot};
}

}  // namespace

void LegParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("leg parameter '") + name +
                                  "' must be finite and positive");
    }
  };
  positive(l_t, "l_t");
  positive(l_s, "l_s");
  positive(m_t, "m_t");
  positive(m_s, "m_s");
  positive(g, "g");
  positive(l_0, "l_0");
  if (std::abs(l_0 - (l_t + l_s)) > 1e-12) {
    throw std::invalid_argument("leg parameter 'l_0' must equal l_t + l_s");
  }
}

bool LegState::finite() const {
  return std::isfinite(phi_h) && std::isfinite(phi_k) && std::isfinite(phi_h_dot) &&
         std::isfinite(phi_k_dot) && std::isfinite(t);
}

KinematicSnapshot kinematics(const LegState& state, const LegParams& params) {
  const auto a = to_absolute(state);
  KinematicSnapshot k;
  k.alpha = state.phi_h - state.phi_k / 2.0;
  k.alpha_dot = state.phi_h_dot - state.phi_k_dot / 2.0;
  k.knee_x = -params.l_t * std::sin(a.psi1);
  k.knee_y = -params.l_t * std::cos(a.psi1);
  k.foot_x = k.knee_x - params.l_s * std::sin(a.psi2);
  k.foot_y = k.knee_y - params.l_s * std::cos(a.psi2);
  if (params.l_t == params.l_s) {
    k.l = 2.0 * params.l_t * std::sin(state.phi_k / 2.0);
  } else {
    k.l = std::sqrt(params.l_t * params.l_t + params.l_s * params.l_s -
                    2.0 * params.l_t * params.l_s * std::cos(state.phi_k));
  }
  return k;
}

Accelerations accelerations(const LegState& state, const JointTorques& torques,
                            const LegParams& params) {
  const auto a = to_absolute(state);
  const double a1 = params.l_t / 2.0;
  const double a2 = params.l_s / 2.0;
  const double c = params.m_s * params.l_t * a2;
  const double delta = a.psi1 - a.psi2;
  const double cd = std::cos(delta);
  const double sd = std::sin(delta);

  const double m11 = params.m_t * a1 * a1 + params.m_s * params.l_t * params.l_t;
  const double m12 = c * cd;
  const double m22 = params.m_s * a2 * a2;

  // dV/dtheta with V = -g * sum(m * depth)
  const double v1 = params.g * (params.m_t * a1 + params.m_s * params.l_t) * std::sin(a.psi1);
  const double v2 = params.g * params.m_s * a2 * std::sin(a.psi2);

  const double q1 = torques.tau_h + torques.tau_k;
  const double q2 = -torques.tau_k;

  const double rhs1 = q1 - c * sd * a.w2 * a.w2 - v1;
  const double rhs2 = q2 + c * sd * a.w1 * a.w1 - v2;

  const double det = m11 * m22 - m12 * m12;
  if (!(std::abs(det) > 1e-14 * m11 * m22)) {
    throw IntegrationError("singular mass matrix");
  }
  const double psi1_dd = (m22 * rhs1 - m12 * rhs2) / det;
  const double psi2_dd = (m11 * rhs2 - m12 * rhs1) / det;
  return {psi1_dd, psi1_dd - psi2_dd};
}

LegState integrate_step(const LegState& state, const JointTorques& torques,
                        const LegParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integration step must be positive");
  }
  struct Deriv {
    double dh, dk, ddh, ddk;
  };
  auto f = [&](const LegState& s) {
    const auto acc = accelerations(s, torques, params);
    return Deriv{s.phi_h_dot, s.phi_k_dot, acc.phi_h_ddot, acc.phi_k_ddot};
  };
  auto offset = [&](const Deriv& d, double h) {
    LegState s = state;
    s.phi_h += h * d.dh;
    s.phi_k += h * d.dk;
    s.phi_h_dot += h * d.ddh;
    s.phi_k_dot += h * d.ddk;
    return s;
  };

  const Deriv k1 = f(state);
  const Deriv k2 = f(offset(k1, dt / 2.0));
  const Deriv k3 = f(offset(k2, dt / 2.0));
  const Deriv k4 = f(offset(k3, dt));

  LegState next = state;
  next.phi_h += dt / 6.0 * (k1.dh + 2.0 * k2.dh + 2.0 * k3.dh + k4.dh);
  next.phi_k += dt / 6.0 * (k1.dk + 2.0 * k2.dk + 2.0 * k3.dk + k4.dk);
  next.phi_h_dot += dt / 6.0 * (k1.ddh + 2.0 * k2.ddh + 2.0 * k3.ddh + k4.ddh);
  next.phi_k_dot += dt / 6.0 * (k1.ddk + 2.0 * k2.ddk + 2.0 * k3.ddk + k4.ddk);
  next.t = state.t + dt;
  if (!next.finite()) {
    throw IntegrationError("non-finite state after integration step at t = " +
                           std::to_string(state.t));
  }
  return next;
}

double total_energy(const LegState& state, const LegParams& params) {
  const auto a = to_absolute(state);
  const double a1 = params.l_t / 2.0;
  const double a2 = params.l_s / 2.0;
  const double kinetic =
      0.5 * params.m_t * a1 * a1 * a.w1 * a.w1 +
      0.5 * params.m_s *
          (params.l_t * params.l_t * a.w1 * a.w1 + a2 * a2 * a.w2 * a.w2 +
           2.0 * params.l_t * a2 * a.w1 * a.w2 * std::cos(a.psi1 - a.psi2));
  const double y1 = -a1 * std::cos(a.psi1);
  const double y2 = -params.l_t * std::cos(a.psi1) - a2 * std::cos(a.psi2);
  const double potential = params.g * (params.m_t * y1 + params.m_s * y2);
  return kinetic + potential;
}

}  // namespace spinal::dynamics
