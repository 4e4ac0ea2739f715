#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "safex/gp.hpp"

namespace safex {

/// Posterior mean and variance on a fixed point set, kept in step with a GP
/// that is conditioned one observation at a time. An extension of the
/// Cholesky factor costs O(n m) instead of a fresh O(n^2 m) solve; a
/// refactorization or an unrelated GP triggers a rebuild. Points farther
/// than GpState::kPriorReach scaled lengths from the data bounding box keep
/// the prior, as in GpState::marginals.
class PosteriorCache {
 public:
  explicit PosteriorCache(Eigen::MatrixXd points);

  const Eigen::MatrixXd& points() const { return points_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

  /// Mean and variance for `gp` (`projected` is left empty).
  const BatchPosterior& update(const GpState& gp);

  /// Columns currently evaluated against the data.
  std::size_t active() const { return active_.size(); }

 private:
  void reset(const GpState& gp);
  void activate(const GpState& gp);
  void extend(const GpState& gp, std::size_t row);
  double& proj(std::size_t slot, std::size_t row) { return v_[slot * capacity_ + row]; }

  Eigen::MatrixXd points_;
  BatchPosterior post_;
  std::vector<std::size_t> active_;   // slot -> column
  std::vector<char> is_active_;       // per column
  std::vector<double> v_;             // slot-major rows of L^{-1} K(X, P)
  std::vector<double> beta_;          // L^{-1} y
  std::size_t capacity_ = 0;
  std::size_t rows_ = 0;
  std::uint64_t lineage_ = 0;
  Eigen::VectorXd last_row_;
  double outputscale_ = 0.0;
};

}  // namespace safex
