#include "safex/posterior_cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace safex {

PosteriorCache::PosteriorCache(Eigen::MatrixXd points)
    : points_(std::move(points)), is_active_(static_cast<std::size_t>(points_.cols()), 0) {}

void PosteriorCache::reset(const GpState& gp) {
  outputscale_ = gp.kernel().outputscale();
  const auto m = points_.cols();
  post_.mean = Eigen::VectorXd::Zero(m);
  post_.variance = Eigen::VectorXd::Constant(m, outputscale_);
  post_.projected.resize(0, m);
  active_.clear();
  std::fill(is_active_.begin(), is_active_.end(), 0);
  v_.clear();
  beta_.clear();
  capacity_ = std::max<std::size_t>(16, gp.size());
  rows_ = 0;
  lineage_ = gp.lineage();
  last_row_.resize(0);
  if (gp.size() == 0) return;

  const Eigen::MatrixXd& chol = gp.cholesky();
  const auto n = static_cast<Eigen::Index>(gp.size());
  const Eigen::Map<const Eigen::VectorXd> y(gp.data().observations.data(), n);
  const Eigen::VectorXd b = chol.triangularView<Eigen::Lower>().solve(y);
  beta_.assign(b.data(), b.data() + n);
  rows_ = gp.size();
  last_row_ = chol.row(n - 1).head(n).transpose();
  activate(gp);
}

void PosteriorCache::activate(const GpState& gp) {
  const auto d = points_.rows();
  const Eigen::MatrixXd inputs = [&] {
    Eigen::MatrixXd x(d, static_cast<Eigen::Index>(gp.size()));
    for (std::size_t i = 0; i < gp.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = gp.data().points[i];
    return x;
  }();
  const Eigen::VectorXd inv_l = gp.kernel().lengthscales().cwiseInverse();
  const Eigen::VectorXd lo = inputs.rowwise().minCoeff();
  const Eigen::VectorXd hi = inputs.rowwise().maxCoeff();
  const double reach2 = GpState::kPriorReach * GpState::kPriorReach;
  std::vector<std::size_t> fresh;
  for (Eigen::Index j = 0; j < points_.cols(); ++j) {
    if (is_active_[static_cast<std::size_t>(j)]) continue;
    double gap2 = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double p = points_(i, j);
      const double g = (p < lo[i] ? lo[i] - p : p > hi[i] ? p - hi[i] : 0.0) * inv_l[i];
      gap2 += g * g;
    }
    if (gap2 <= reach2) fresh.push_back(static_cast<std::size_t>(j));
  }
  if (fresh.empty()) return;

  Eigen::MatrixXd sub(d, static_cast<Eigen::Index>(fresh.size()));
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    sub.col(static_cast<Eigen::Index>(k)) = points_.col(static_cast<Eigen::Index>(fresh[k]));
  }
  const auto n = static_cast<Eigen::Index>(rows_);
  Eigen::MatrixXd proj = gp.kernel().cross(inputs, sub);
  gp.cholesky().topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(proj);
  const Eigen::Map<const Eigen::VectorXd> beta(beta_.data(), n);
  const std::size_t first = active_.size();
  v_.resize((first + fresh.size()) * capacity_, 0.0);
  for (std::size_t k = 0; k < fresh.size(); ++k) {
    const std::size_t col = fresh[k];
    const std::size_t slot = first + k;
    is_active_[col] = 1;
    active_.push_back(col);
    const auto c = proj.col(static_cast<Eigen::Index>(k));
    std::copy(c.data(), c.data() + n, &v_[slot * capacity_]);
    const auto j = static_cast<Eigen::Index>(col);
    post_.mean[j] = c.dot(beta);
    post_.variance[j] = std::max(0.0, outputscale_ - c.squaredNorm());
  }
}

void PosteriorCache::extend(const GpState& gp, std::size_t row) {
  if (row >= capacity_) {
    const std::size_t cap = 2 * capacity_;
    std::vector<double> grown(active_.size() * cap, 0.0);
    for (std::size_t s = 0; s < active_.size(); ++s) {
      std::copy(&v_[s * capacity_], &v_[s * capacity_] + rows_, &grown[s * cap]);
    }
    v_.swap(grown);
    capacity_ = cap;
  }
  const Eigen::MatrixXd& chol = gp.cholesky();
  const auto r = static_cast<Eigen::Index>(row);
  const Eigen::VectorXd l = chol.row(r).head(r).transpose();
  const double pivot = chol(r, r);
  const Point& x = gp.data().points[row];
  const double y = gp.data().observations[row];
  double lb = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) lb += l[i] * beta_[static_cast<std::size_t>(i)];
  const double b = (y - lb) / pivot;
  beta_.push_back(b);

  const RbfKernel& kernel = gp.kernel();
  const Eigen::VectorXd inv_l2 = kernel.lengthscales().array().square().inverse();
  const auto d = points_.rows();
  for (std::size_t s = 0; s < active_.size(); ++s) {
    const auto j = static_cast<Eigen::Index>(active_[s]);
    const double* vs = &v_[s * capacity_];
    double dot = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) dot += l[i] * vs[i];
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double t = points_(i, j) - x[i];
      r2 += t * t * inv_l2[i];
    }
    const double v = (kernel.from_scaled_sq_distance(r2) - dot) / pivot;
    proj(s, row) = v;
    post_.mean[j] += v * b;
    post_.variance[j] = std::max(0.0, post_.variance[j] - v * v);
  }
  rows_ = row + 1;
  last_row_ = chol.row(r).head(r + 1).transpose();
}

const BatchPosterior& PosteriorCache::update(const GpState& gp) {
  if (points_.rows() != static_cast<Eigen::Index>(gp.kernel().dim())) {
    throw std::invalid_argument("PosteriorCache: dimension mismatch");
  }
  const std::size_t n = gp.size();
  bool consistent = post_.mean.size() == points_.cols() && n >= rows_ &&
                    gp.kernel().outputscale() == outputscale_;
  if (consistent && rows_ > 0) {
    const auto r = static_cast<Eigen::Index>(rows_);
    consistent = gp.lineage() == lineage_ &&
                 gp.cholesky().row(r - 1).head(r).transpose() == last_row_;
  }
  if (!consistent || rows_ == 0) {
    reset(gp);
    return post_;
  }
  for (std::size_t row = rows_; row < n; ++row) extend(gp, row);
  activate(gp);
  return post_;
}

}  // namespace safex
