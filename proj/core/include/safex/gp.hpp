#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "safex/kernel.hpp"
#include "safex/noise.hpp"
#include "safex/types.hpp"

namespace safex {

/// Observations D_n = {(x_i, y_i)} with the noise variance used for each one.
struct Dataset {
  std::vector<Point> points;
  std::vector<double> observations;
  std::vector<double> noise_variances;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const;
};

/// Posterior over a batch of points. `projected` holds L^{-1} k(X, p_j) per
/// column, which is what cross-covariances between batch points need.
struct BatchPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::MatrixXd projected;

  std::size_t size() const { return static_cast<std::size_t>(mean.size()); }
};

/// Joint posterior of (f(x), f(z)).
struct JointPosterior {
  double mean_x = 0.0;
  double var_x = 0.0;
  double mean_z = 0.0;
  double var_z = 0.0;
  double cov = 0.0;
};

/// JointPosterior plus the gradients the acquisition optimizer needs.
struct JointPosteriorGradient {
  JointPosterior value;
  Eigen::VectorXd dvar_x_dx;
  Eigen::VectorXd dcov_dx;
  Eigen::VectorXd dmean_z_dz;
  Eigen::VectorXd dvar_z_dz;
  Eigen::VectorXd dcov_dz;
};

/// Exact GP regression with zero prior mean.
///
/// A GpState is an immutable snapshot: conditioning returns a new state and
/// leaves the original untouched, so states can be shared freely between
/// threads. Copies are cheap (the factorization is reference counted).
///
/// The Gram matrix K + diag(sigma_nu^2) is held as a lower Cholesky factor.
/// Conditioning extends the factor by one row; every `kRefactorPeriod`
/// extensions (or when the extension loses positive definiteness) the factor
/// is recomputed from scratch with adaptive jitter.
class GpState {
 public:
  static constexpr std::size_t kRefactorPeriod = 50;
  static constexpr double kInitialJitter = 1e-10;
  static constexpr double kMaxJitter = 1e-4;

  /// Prior (empty dataset).
  GpState(RbfKernel kernel, NoiseModel noise);

  /// Fit from scratch. Noise variances missing from `data` are filled in from
  /// the noise model.
  static GpState fit(RbfKernel kernel, NoiseModel noise, Dataset data);

  const RbfKernel& kernel() const;
  const NoiseModel& noise() const;
  const Dataset& data() const;
  std::size_t size() const;
  /// Diagonal jitter (absolute) used in the current factorization.
  double jitter() const;
  /// Lower Cholesky factor of K + Sigma + jitter I.
  const Eigen::MatrixXd& cholesky() const;
  /// Identifies a factorization; kept by rank-one extensions, renewed by
  /// every full refactorization.
  std::uint64_t lineage() const;

  Posterior posterior(const Point& x) const;
  /// Points are the columns of `points`.
  BatchPosterior posterior(const Eigen::MatrixXd& points) const;
  /// Mean and variance only (`projected` is left empty). Columns farther
  /// than kPriorReach scaled lengths from the bounding box of the data keep
  /// the prior; their neglected cross-covariance is below
  /// exp(-kPriorReach^2 / 2) times the outputscale.
  BatchPosterior marginals(const Eigen::MatrixXd& points) const;
  static constexpr double kPriorReach = 9.0;

  double covariance(const Point& x, const Point& z) const;
  /// Posterior correlation in [-1, 1]; 0 when either variance vanishes.
  double cross_correlation(const Point& x, const Point& z) const;

  JointPosterior joint(const Point& x, const Point& z) const;
  JointPosteriorGradient joint_with_gradient(const Point& x, const Point& z) const;

  double noise_variance(const Point& x) const;
  double prior_variance(const Point& x) const;

  GpState condition(const Point& x, double y) const;
  GpState condition(const Point& x, double y, double noise_variance) const;

 private:
  struct Factor;
  explicit GpState(std::shared_ptr<const Factor> factor);

  std::shared_ptr<const Factor> factor_;
};

/// Variances at or below this fraction of the outputscale are treated as zero
/// when forming ratios (correlations, mean/std).
inline constexpr double kDegenerateVarianceFraction = 1e-14;

}  // namespace safex
