#include "safex/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safex {

RbfKernel::RbfKernel(Eigen::VectorXd lengthscales, double outputscale)
    : lengthscales_(std::move(lengthscales)), outputscale_(outputscale) {
  if (lengthscales_.size() == 0 || (lengthscales_.array() <= 0.0).any()) {
    throw std::invalid_argument("RbfKernel: lengthscales must be positive");
  }
  if (!(outputscale_ > 0.0)) throw std::invalid_argument("RbfKernel: outputscale must be positive");
  inv_sq_lengthscales_ = lengthscales_.array().square().inverse();
}

RbfKernel RbfKernel::isotropic(std::size_t dim, double lengthscale, double outputscale) {
  return RbfKernel(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), lengthscale),
                   outputscale);
}

double RbfKernel::scaled_sq_distance(const Point& a, const Point& b) const {
  return ((a - b).array().square() * inv_sq_lengthscales_.array()).sum();
}

double RbfKernel::from_scaled_sq_distance(double r2) const {
  return outputscale_ * std::exp(-0.5 * r2);
}

double RbfKernel::operator()(const Point& a, const Point& b) const {
  return from_scaled_sq_distance(scaled_sq_distance(a, b));
}

double RbfKernel::metric_from_scaled_distance(double r) const {
  // 2s - 2s exp(-r^2/2), written with expm1 to keep small distances accurate.
  return std::sqrt(std::max(0.0, -2.0 * outputscale_ * std::expm1(-0.5 * r * r)));
}

double RbfKernel::metric(const Point& a, const Point& b) const {
  return metric_from_scaled_distance(std::sqrt(scaled_sq_distance(a, b)));
}

Eigen::MatrixXd RbfKernel::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  const Eigen::MatrixXd as = lengthscales_.cwiseInverse().asDiagonal() * a;
  const Eigen::MatrixXd bs = lengthscales_.cwiseInverse().asDiagonal() * b;
  const Eigen::VectorXd an = as.colwise().squaredNorm().transpose();
  const Eigen::VectorXd bn = bs.colwise().squaredNorm().transpose();
  Eigen::MatrixXd r2 = -2.0 * (as.transpose() * bs);
  r2.colwise() += an;
  r2.rowwise() += bn.transpose();
  return outputscale_ * (-0.5 * r2.array().max(0.0)).exp().matrix();
}

Eigen::MatrixXd RbfKernel::gram(const Eigen::MatrixXd& points) const {
  // Direct differences: exact symmetry and no cancellation for nearby points.
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = outputscale_;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      k(i, j) = from_scaled_sq_distance(
          ((points.col(i) - points.col(j)).array().square() * inv_sq_lengthscales_.array())
              .sum());
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Eigen::VectorXd RbfKernel::column(const Eigen::MatrixXd& points, const Point& x) const {
  Eigen::VectorXd k(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    k[j] = from_scaled_sq_distance(
        ((points.col(j) - x).array().square() * inv_sq_lengthscales_.array()).sum());
  }
  return k;
}

Eigen::MatrixXd RbfKernel::column_gradient(const Eigen::MatrixXd& points, const Point& x,
                                           const Eigen::VectorXd& kx) const {
  // d/dx k(x, c) = -k(x, c) (x - c) / l^2
  Eigen::MatrixXd g(points.cols(), x.size());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    g.row(j) = (-kx[j] * (x - points.col(j)).array() * inv_sq_lengthscales_.array())
                   .matrix()
                   .transpose();
  }
  return g;
}

}  // namespace safex
