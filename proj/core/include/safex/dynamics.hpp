#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Core>

namespace safex {

/// Torque-limited pendulum, upright at theta = 0:
///   theta'' = 3g/(2l) sin(theta) + 3u/(m l^2)
/// integrated with semi-implicit Euler, angular speed clipped to max_speed.
struct PendulumParams {
  double gravity = 9.81;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_torque = 2.0;
  double max_speed = 8.0;
  double theta0 = 0.1;
  double omega0 = 0.0;
  std::size_t steps = 400;
  double omega_threshold = 0.5;
  /// Constrain max |theta'| instead of max theta'.
  bool absolute = false;
};

/// Pole on a cart with the standard equations of motion, explicit Euler.
/// The applied force is force_scale * u.
struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double dt = 0.02;
  double force_scale = 10.0;
  double theta0 = 0.05;
  std::size_t steps = 200;
  double theta_threshold = 0.28;
  /// Constrain max |theta| instead of max theta.
  bool absolute = true;
  /// The episode stops once |theta| reaches this angle (the pole has fallen).
  double fallen_angle = std::numbers::pi / 2.0;
};

/// States after each step and the control applied at each step. The state is
/// (theta, theta') for the pendulum and (s, s', theta, theta') for the cart-pole.
struct ControllerEpisode {
  std::vector<Eigen::VectorXd> states;
  std::vector<double> controls;
  Eigen::VectorXd initial_state;
  /// Steps simulated before an early stop; equals the step count otherwise.
  std::size_t completed_steps = 0;
  bool finite = true;
};

/// u_t = alpha[0] theta_t + alpha[1] theta'_t
ControllerEpisode simulate_pendulum(const PendulumParams& p, const Eigen::Vector2d& alpha);
/// u_t = alpha[0] theta_t + alpha[1] theta'_t + alpha[2] s'_t
ControllerEpisode simulate_cartpole(const CartPoleParams& p, const Eigen::Vector3d& alpha);

/// -(max_t theta'_t - threshold), the maximum including the initial state.
double pendulum_constraint(const PendulumParams& p, const ControllerEpisode& e);
/// -(max_t |theta_t| - threshold), the maximum including the initial state.
double cartpole_constraint(const CartPoleParams& p, const ControllerEpisode& e);

}  // namespace safex
