#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "safex/entropy.hpp"
#include "safex/gp.hpp"

namespace safex::oracle {

// Independent oracles for tests. Nothing here calls the closed forms under
// test.

/// Gauss-Hermite nodes and weights for the weight exp(-t^2), via the
/// Golub-Welsch eigenproblem.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = es.eigenvectors().row(0).transpose().array().square() *
                      std::sqrt(std::numbers::pi);
  return {es.eigenvalues(), w};
}

/// ln 2 exp(-c1 m^2 / v), the surrogate entropy, from its definition.
inline double surrogate_entropy(double mean, double var) {
  const double c1 = 1.0 / (std::numbers::pi * std::numbers::ln2);
  return std::numbers::ln2 * std::exp(-c1 * mean * mean / var);
}

/// E_y[surrogate entropy of Psi(z) after observing y at x] under the
/// one-step GP update, by 64-node Gauss-Hermite quadrature.
inline double expected_post_entropy_quadrature(const MiInputs& in, double mean_x = 0.0) {
  static const auto gh = gauss_hermite(64);
  const double sy2 = in.var_x + in.noise_var;
  const double var_post = in.var_z - in.cov * in.cov / sy2;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < gh.first.size(); ++k) {
    const double y = mean_x + std::sqrt(2.0 * sy2) * gh.first[k];
    const double mean_post = in.mean_z + in.cov / sy2 * (y - mean_x);
    acc += gh.second[k] * surrogate_entropy(mean_post, var_post);
  }
  return acc / std::sqrt(std::numbers::pi);
}

/// Dense posterior at x from the textbook formulas with a full solve.
inline std::pair<double, double> dense_posterior(const RbfKernel& k, const std::vector<Point>& X,
                                                 const std::vector<double>& y,
                                                 const std::vector<double>& nv, const Point& x) {
  const auto n = static_cast<Eigen::Index>(X.size());
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd kx(n), Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r2 = ((X[i] - X[j]).array() / k.lengthscales().array()).square().sum();
      K(i, j) = k.outputscale() * std::exp(-0.5 * r2);
    }
    K(i, i) += nv[static_cast<std::size_t>(i)];
    const double r2 = ((X[i] - x).array() / k.lengthscales().array()).square().sum();
    kx[i] = k.outputscale() * std::exp(-0.5 * r2);
    Y[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  const double mean = kx.dot(lu.solve(Y));
  const double var = k.outputscale() - kx.dot(lu.solve(kx));
  return {mean, var};
}

/// Same expectation by the composite trapezoid rule on +-12 standard
/// deviations of y. Slow, but it resolves the narrow integrand that appears
/// when the effective correlation approaches 1.
inline double expected_post_entropy_trapezoid(const MiInputs& in, int panels = 200000) {
  const double sy2 = in.var_x + in.noise_var;
  const double sy = std::sqrt(sy2);
  const double var_post = in.var_z - in.cov * in.cov / sy2;
  const double h = 24.0 * sy / panels;
  double acc = 0.0;
  for (int k = 0; k <= panels; ++k) {
    const double y = -12.0 * sy + k * h;
    const double density = std::exp(-0.5 * y * y / sy2) / (sy * std::sqrt(2.0 * std::numbers::pi));
    const double w = (k == 0 || k == panels) ? 0.5 : 1.0;
    acc += w * density * surrogate_entropy(in.mean_z + in.cov / sy2 * y, var_post);
  }
  return acc * h;
}

/// A random well-posed MiInputs. |rho| <= max_rho keeps the effective
/// correlation where 64-node Gauss-Hermite quadrature is converged.
inline MiInputs random_state(std::mt19937_64& rng, double max_rho = std::sqrt(0.9)) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MiInputs in;
  in.var_x = std::exp(-4.0 + 6.0 * u(rng));
  in.var_z = std::exp(-4.0 + 6.0 * u(rng));
  in.noise_var = std::exp(-5.0 + 5.0 * u(rng));
  const double rho = max_rho * (-1.0 + 2.0 * u(rng));
  in.cov = rho * std::sqrt(in.var_x * in.var_z);
  in.mean_z = (-4.0 + 8.0 * u(rng)) * std::sqrt(in.var_z);
  return in;
}

}  // namespace safex::oracle
