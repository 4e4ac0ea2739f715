#pragma once

#include <numbers>

#include "safex/gp.hpp"
#include "safex/types.hpp"

namespace safex {

struct MiConstants {
  static constexpr double ln2 = std::numbers::ln2;
  static constexpr double c1 = 1.0 / (std::numbers::pi * std::numbers::ln2);
  static constexpr double c2 = 2.0 * c1 - 1.0;
};

/// Posterior statistics of f at one point, the inputs to the entropy of the
/// safety indicator Psi.
struct PsiStatistics {
  double mean = 0.0;
  double std = 0.0;
};

/// Binary entropy of Psi with p = P(f < 0) = Phi(-mean/std). Throws
/// NumericalError for std <= 0.
double entropy_exact(const PsiStatistics& s);

/// ln 2 * exp(-c1 (mean/std)^2).
double entropy_approx(const PsiStatistics& s);

/// Sufficient statistics for the approximate mutual information between an
/// observation at x and Psi(z).
struct MiInputs {
  double mean_z = 0.0;
  double var_z = 0.0;
  double var_x = 0.0;
  double noise_var = 0.0;
  double cov = 0.0;  // posterior covariance of f(x), f(z)
};

MiInputs mi_inputs(const GpState& gp, const Point& x, const Point& z);

/// E_y[ H^_{n+1}[Psi(z) | x, y] ] in closed form.
double expected_post_entropy(const MiInputs& in);
/// H^_n[Psi(z)] - expected_post_entropy, floored at zero.
double mutual_info(const MiInputs& in);
/// The same quantity in terms of R^2 = mean_z^2 / var_z and
/// rho~^2 = rho_nu^2(x) rho_n^2(x, z).
double mutual_info_rewritten(const MiInputs& in);

double expected_post_entropy(const GpState& gp, const Point& x, const Point& z);
double mutual_info(const GpState& gp, const Point& x, const Point& z);
double mutual_info_rewritten(const GpState& gp, const Point& x, const Point& z);

/// ln 2 * sigma_n^2(x) / sigma_nu^2(x).
double mi_upper_bound(const GpState& gp, const Point& x);

/// rho_nu^2(x) = sigma_n^2(x) / (sigma_nu^2(x) + sigma_n^2(x)).
double rho_nu_squared(double var_x, double noise_var);

/// Mutual information as a function of (R^2, rho~^2) with its partial
/// derivatives.
struct MiReduced {
  double value = 0.0;
  double d_r2 = 0.0;
  double d_t = 0.0;
};
MiReduced mutual_info_reduced(double r2, double t);

/// Value and gradient with respect to (mean_z, var_z, var_x, cov).
struct MiSensitivity {
  double value = 0.0;
  double d_mean_z = 0.0;
  double d_var_z = 0.0;
  double d_var_x = 0.0;
  double d_cov = 0.0;
};
MiSensitivity mutual_info_sensitivity(const MiInputs& in);

/// b(eta) = ln 2 exp(-c1 M^2 / eta) [1 - sqrt(noise / (2 c1 eta + noise))].
double b_function(double eta, double M, double noise);
/// Inverse of b on [0, ln 2). Throws std::out_of_range outside that range.
double b_inverse(double target, double M, double noise);

/// ln 2 / (noise ln(1 + 1/noise)).
double info_gain_constant(double noise);
/// C ln(1 + var_x / noise): one term of the empirical information-gain sum.
double info_gain_term(double var_x, double noise);

}  // namespace safex
