#include "safex/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace safex {

namespace {

constexpr double kLn2 = MiConstants::ln2;
constexpr double kC1 = MiConstants::c1;
constexpr double kC2 = MiConstants::c2;
constexpr double kNegativeTolerance = 1e-12;

void require_positive_std(const PsiStatistics& s) {
  if (!(s.std > 0.0)) throw NumericalError("entropy: standard deviation must be positive");
}

// -p ln p with 0 ln 0 = 0; `log_p` is supplied so that it can come from log1p.
double plogp(double p, double log_p) { return p > 0.0 ? -p * log_p : 0.0; }

bool degenerate(const MiInputs& in) {
  return !(in.var_z > 0.0) || !(in.noise_var > 0.0);
}

double ratio_sq(const MiInputs& in) { return in.mean_z * in.mean_z / in.var_z; }

double reduced_t(const MiInputs& in) {
  if (!(in.var_x > 0.0)) return 0.0;
  const double t = in.cov * in.cov / ((in.noise_var + in.var_x) * in.var_z);
  return std::clamp(t, 0.0, 1.0);
}

double floor_mi(double v) {
  if (v < -kNegativeTolerance) {
    throw NumericalError("mutual_info: negative value " + std::to_string(v));
  }
  return std::max(0.0, v);
}

}  // namespace

double entropy_exact(const PsiStatistics& s) {
  require_positive_std(s);
  const double a = s.mean / (std::numbers::sqrt2 * s.std);
  const double p = 0.5 * std::erfc(a);   // P(f < 0)
  const double q = 0.5 * std::erfc(-a);  // P(f >= 0)
  const double log_p = p < 0.5 ? std::log(p) : std::log1p(-q);
  const double log_q = q < 0.5 ? std::log(q) : std::log1p(-p);
  return plogp(p, log_p) + plogp(q, log_q);
}

double entropy_approx(const PsiStatistics& s) {
  require_positive_std(s);
  const double r = s.mean / s.std;
  return kLn2 * std::exp(-kC1 * r * r);
}

MiInputs mi_inputs(const GpState& gp, const Point& x, const Point& z) {
  const JointPosterior j = gp.joint(x, z);
  MiInputs in;
  in.mean_z = j.mean_z;
  in.var_z = j.var_z;
  in.var_x = j.var_x;
  in.noise_var = gp.noise_variance(x);
  in.cov = j.cov;
  const double floor = kDegenerateVarianceFraction * gp.kernel().outputscale();
  if (in.var_z <= floor) in.var_z = 0.0;
  if (in.var_x <= floor) {
    in.var_x = 0.0;
    in.cov = 0.0;
  }
  return in;
}

double expected_post_entropy(const MiInputs& in) {
  if (degenerate(in)) return 0.0;
  double rho2 = 0.0;
  if (in.var_x > 0.0) rho2 = std::min(1.0, in.cov * in.cov / (in.var_x * in.var_z));
  const double nv = in.noise_var;
  const double vx = in.var_x;
  const double denom = nv + vx * (1.0 + kC2 * rho2);
  const double root = std::sqrt(std::max(0.0, (nv + vx * (1.0 - rho2)) / denom));
  return kLn2 * root * std::exp(-kC1 * ratio_sq(in) * (nv + vx) / denom);
}

double mutual_info(const MiInputs& in) {
  if (degenerate(in)) return 0.0;
  const double h = kLn2 * std::exp(-kC1 * ratio_sq(in));
  return floor_mi(h - expected_post_entropy(in));
}

MiReduced mutual_info_reduced(double r2, double t) {
  MiReduced out;
  t = std::clamp(t, 0.0, 1.0);
  const double s = 1.0 + kC2 * t;
  const double g = std::sqrt(std::max(0.0, (1.0 - t) / s));
  const double e0 = std::exp(-kC1 * r2);
  const double e1 = std::exp(-kC1 * r2 / s);
  out.value = kLn2 * (e0 - g * e1);
  out.d_r2 = kLn2 * (-kC1 * e0 + g * e1 * kC1 / s);
  // g'(t) diverges at t = 1; evaluate it slightly inside.
  const double tg = std::min(t, 1.0 - 1e-12);
  const double sg = 1.0 + kC2 * tg;
  const double gg = std::sqrt((1.0 - tg) / sg);
  const double dg = -(1.0 + kC2) / (2.0 * gg * sg * sg);
  out.d_t = -kLn2 * e1 * (dg + g * kC1 * r2 * kC2 / (s * s));
  return out;
}

double mutual_info_rewritten(const MiInputs& in) {
  if (degenerate(in)) return 0.0;
  return floor_mi(mutual_info_reduced(ratio_sq(in), reduced_t(in)).value);
}

MiSensitivity mutual_info_sensitivity(const MiInputs& in) {
  MiSensitivity out;
  if (degenerate(in)) return out;
  const double r2 = ratio_sq(in);
  const double t = reduced_t(in);
  const MiReduced m = mutual_info_reduced(r2, t);
  out.value = std::max(0.0, m.value);
  out.d_mean_z = m.d_r2 * 2.0 * in.mean_z / in.var_z;
  out.d_var_z = m.d_r2 * (-r2 / in.var_z) + m.d_t * (-t / in.var_z);
  if (in.var_x > 0.0) {
    const double a = in.noise_var + in.var_x;
    out.d_var_x = m.d_t * (-t / a);
    out.d_cov = m.d_t * 2.0 * in.cov / (a * in.var_z);
  }
  return out;
}

double expected_post_entropy(const GpState& gp, const Point& x, const Point& z) {
  return expected_post_entropy(mi_inputs(gp, x, z));
}

double mutual_info(const GpState& gp, const Point& x, const Point& z) {
  return mutual_info(mi_inputs(gp, x, z));
}

double mutual_info_rewritten(const GpState& gp, const Point& x, const Point& z) {
  return mutual_info_rewritten(mi_inputs(gp, x, z));
}

double rho_nu_squared(double var_x, double noise_var) {
  if (!(var_x > 0.0)) return 0.0;
  return var_x / (noise_var + var_x);
}

double mi_upper_bound(const GpState& gp, const Point& x) {
  return kLn2 * gp.posterior(x).variance / gp.noise_variance(x);
}

double b_function(double eta, double M, double noise) {
  if (!(eta > 0.0)) return 0.0;
  return kLn2 * std::exp(-kC1 * M * M / eta) *
         (1.0 - std::sqrt(noise / (2.0 * kC1 * eta + noise)));
}

double b_inverse(double target, double M, double noise) {
  if (!(target >= 0.0) || !(target < kLn2)) {
    throw std::out_of_range("b_inverse: target outside [0, ln 2)");
  }
  if (target == 0.0) return std::numeric_limits<double>::min();
  double hi = 1.0;
  while (b_function(hi, M, noise) < target) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::out_of_range("b_inverse: target not reachable");
  }
  double lo = 0.0;
  for (int i = 0; i < 2000 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (b_function(mid, M, noise) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double info_gain_constant(double noise) { return kLn2 / (noise * std::log1p(1.0 / noise)); }

double info_gain_term(double var_x, double noise) {
  return info_gain_constant(noise) * std::log1p(std::max(0.0, var_x) / noise);
}

}  // namespace safex
