#include "safex/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace safex {

ControllerEpisode simulate_pendulum(const PendulumParams& p, const Eigen::Vector2d& alpha) {
  ControllerEpisode e;
  e.initial_state = Eigen::Vector2d(p.theta0, p.omega0);
  e.states.reserve(p.steps);
  e.controls.reserve(p.steps);
  double theta = p.theta0;
  double omega = p.omega0;
  const double a_grav = 3.0 * p.gravity / (2.0 * p.length);
  const double a_ctrl = 3.0 / (p.mass * p.length * p.length);
  for (std::size_t t = 0; t < p.steps; ++t) {
    const double u = std::clamp(alpha[0] * theta + alpha[1] * omega, -p.max_torque, p.max_torque);
    omega = std::clamp(omega + (a_grav * std::sin(theta) + a_ctrl * u) * p.dt, -p.max_speed,
                       p.max_speed);
    theta += omega * p.dt;
    e.controls.push_back(u);
    e.states.emplace_back(Eigen::Vector2d(theta, omega));
    if (!std::isfinite(theta) || !std::isfinite(omega)) {
      e.finite = false;
      break;
    }
    e.completed_steps = t + 1;
  }
  return e;
}

ControllerEpisode simulate_cartpole(const CartPoleParams& p, const Eigen::Vector3d& alpha) {
  ControllerEpisode e;
  e.initial_state = Eigen::Vector4d(0.0, 0.0, p.theta0, 0.0);
  e.states.reserve(p.steps);
  e.controls.reserve(p.steps);
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_ml = p.pole_mass * p.half_length;
  double s = 0.0;
  double s_dot = 0.0;
  double theta = p.theta0;
  double theta_dot = 0.0;
  for (std::size_t t = 0; t < p.steps; ++t) {
    const double u = alpha[0] * theta + alpha[1] * theta_dot + alpha[2] * s_dot;
    const double force = p.force_scale * u;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const double temp = (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) /
        (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double s_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
    s += p.dt * s_dot;
    s_dot += p.dt * s_acc;
    theta += p.dt * theta_dot;
    theta_dot += p.dt * theta_acc;
    e.controls.push_back(u);
    e.states.emplace_back(Eigen::Vector4d(s, s_dot, theta, theta_dot));
    if (!std::isfinite(s_dot) || !std::isfinite(theta) || !std::isfinite(theta_dot)) {
      e.finite = false;
      break;
    }
    e.completed_steps = t + 1;
    if (std::abs(theta) >= p.fallen_angle) break;
  }
  return e;
}

double pendulum_constraint(const PendulumParams& p, const ControllerEpisode& e) {
  auto value = [&](const Eigen::VectorXd& s) { return p.absolute ? std::abs(s[1]) : s[1]; };
  double peak = value(e.initial_state);
  for (const auto& s : e.states) peak = std::max(peak, value(s));
  return -(peak - p.omega_threshold);
}

double cartpole_constraint(const CartPoleParams& p, const ControllerEpisode& e) {
  auto value = [&](const Eigen::VectorXd& s) { return p.absolute ? std::abs(s[2]) : s[2]; };
  double peak = value(e.initial_state);
  for (const auto& s : e.states) peak = std::max(peak, value(s));
  return -(peak - p.theta_threshold);
}

}  // namespace safex
