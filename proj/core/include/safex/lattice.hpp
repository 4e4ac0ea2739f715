#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "safex/kernel.hpp"
#include "safex/types.hpp"

namespace safex {

/// Regular lattice of points origin + sum_k i_k step_k, 0 <= i_k < counts[k].
/// The first lattice axis varies fastest in the flat index. Box grids and
/// discretized line segments are the two uses.
class GridDomain {
 public:
  GridDomain(Point origin, Eigen::MatrixXd steps, std::vector<std::size_t> counts);

  /// Uniform grid over a box including both faces; every count must be >= 2.
  static GridDomain box(const Box& box, std::vector<std::size_t> counts);
  static GridDomain box(const Box& box, std::size_t per_dim);
  /// `count` points from `start` to `end` inclusive.
  static GridDomain segment(const Point& start, const Point& end, std::size_t count);

  std::size_t dim() const { return static_cast<std::size_t>(origin_.size()); }
  std::size_t axes() const { return counts_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const Eigen::MatrixXd& steps() const { return steps_; }

  /// d x size() matrix of all points.
  const Eigen::MatrixXd& points() const { return points_; }
  Point point(std::size_t index) const { return points_.col(static_cast<Eigen::Index>(index)); }

  std::vector<std::size_t> multi_index(std::size_t index) const;
  std::size_t flat_index(const std::vector<std::size_t>& multi) const;
  /// Lattice point closest to x in lattice coordinates (rounded, clamped).
  std::size_t nearest_index(const Point& x) const;

  /// Kernel-scaled length of one step along each lattice axis.
  Eigen::VectorXd scaled_steps(const RbfKernel& kernel) const;

 private:
  Point origin_;
  Eigen::MatrixXd steps_;
  Eigen::MatrixXd steps_pinv_;
  std::vector<std::size_t> counts_;
  std::size_t size_ = 0;
  Eigen::MatrixXd points_;
};

/// Squared weighted distance from every lattice point to the nearest site:
/// min over sites s of sum_k (w_k (i_k - s_k))^2, or +inf without sites.
/// Separable Felzenszwalb-Huttenlocher transform, O(size * axes).
std::vector<double> squared_distance_transform(const GridDomain& grid,
                                               const std::vector<bool>& sites,
                                               const Eigen::VectorXd& weights);

}  // namespace safex
