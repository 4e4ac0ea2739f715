#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "safex/types.hpp"

namespace safex {

/// Squared-exponential (RBF) kernel with one lengthscale per input dimension:
///
///   k(x, x') = outputscale * exp(-0.5 * sum_i ((x_i - x'_i) / l_i)^2)
///
/// so that k(x, x) = outputscale and |k(x, x')| <= outputscale.
class RbfKernel {
 public:
  RbfKernel(Eigen::VectorXd lengthscales, double outputscale);

  static RbfKernel isotropic(std::size_t dim, double lengthscale, double outputscale);

  std::size_t dim() const { return static_cast<std::size_t>(lengthscales_.size()); }
  const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
  double outputscale() const { return outputscale_; }

  double operator()(const Point& a, const Point& b) const;

  /// sum_i ((a_i - b_i) / l_i)^2
  double scaled_sq_distance(const Point& a, const Point& b) const;

  /// Kernel value as a function of the scaled distance r.
  double from_scaled_sq_distance(double r2) const;

  /// Kernel metric d(x, x') = sqrt(k(x,x) + k(x',x') - 2 k(x,x')).
  double metric(const Point& a, const Point& b) const;
  double metric_from_scaled_distance(double r) const;

  /// Column-wise points; returns the (a.cols() x b.cols()) cross-kernel matrix.
  Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;
  Eigen::MatrixXd gram(const Eigen::MatrixXd& points) const;
  /// k(points_j, x) for every column j.
  Eigen::VectorXd column(const Eigen::MatrixXd& points, const Point& x) const;

  /// d k(x, c_j) / d x for every column c_j, as a (cols x d) matrix, given the
  /// kernel values kx = column(points, x).
  Eigen::MatrixXd column_gradient(const Eigen::MatrixXd& points, const Point& x,
                                  const Eigen::VectorXd& kx) const;

 private:
  Eigen::VectorXd lengthscales_;
  Eigen::VectorXd inv_sq_lengthscales_;
  double outputscale_;
};

}  // namespace safex
