#include "safex/gp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

namespace safex {

namespace {
std::atomic<std::uint64_t> lineage_counter{0};
}  // namespace

struct GpState::Factor {
  RbfKernel kernel;
  NoiseModel noise;
  Dataset data;
  Eigen::MatrixXd inputs;  // d x n
  Eigen::MatrixXd chol;    // n x n, lower triangular
  Eigen::VectorXd alpha;   // (K + Sigma)^{-1} y
  double jitter = 0.0;
  std::size_t extensions = 0;
  std::uint64_t lineage = 0;

  Factor(RbfKernel k, NoiseModel nm) : kernel(std::move(k)), noise(std::move(nm)) {}

  auto lower() const { return chol.triangularView<Eigen::Lower>(); }

  Eigen::VectorXd project(const Eigen::VectorXd& k) const { return lower().solve(k); }

  void refactor() {
    const auto n = static_cast<Eigen::Index>(data.size());
    const double scale = kernel.outputscale();
    Eigen::MatrixXd gram = kernel.gram(inputs);
    for (Eigen::Index i = 0; i < n; ++i) gram(i, i) += data.noise_variances[static_cast<std::size_t>(i)];
    // Plain factorization first; jitter only when it fails.
    for (double j = 0.0; j <= kMaxJitter * scale * (1.0 + 1e-12);
         j = j == 0.0 ? kInitialJitter * scale : 2.0 * j) {
      Eigen::MatrixXd jittered = gram;
      jittered.diagonal().array() += j;
      Eigen::LLT<Eigen::MatrixXd> llt(jittered);
      if (llt.info() == Eigen::Success) {
        chol = llt.matrixL();
        jitter = j;
        extensions = 0;
        lineage = ++lineage_counter;
        return;
      }
    }
    throw NumericalError("GpState: Gram matrix is not positive definite after maximal jitter (" +
                         std::to_string(kMaxJitter * scale) + ")");
  }

  void solve_alpha() {
    const Eigen::Map<const Eigen::VectorXd> y(data.observations.data(),
                                              static_cast<Eigen::Index>(data.size()));
    alpha = lower().solve(y);
    chol.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);
  }

  void check_point(const Point& x) const {
    if (static_cast<std::size_t>(x.size()) != kernel.dim()) {
      throw std::invalid_argument("GpState: point dimension " + std::to_string(x.size()) +
                                  " does not match kernel dimension " +
                                  std::to_string(kernel.dim()));
    }
  }
};

double Posterior::stddev() const { return std::sqrt(std::max(0.0, variance)); }

GpState::GpState(RbfKernel kernel, NoiseModel noise)
    : factor_(std::make_shared<Factor>(std::move(kernel), std::move(noise))) {
  auto* f = const_cast<Factor*>(factor_.get());
  f->inputs.resize(static_cast<Eigen::Index>(f->kernel.dim()), 0);
}

GpState::GpState(std::shared_ptr<const Factor> factor) : factor_(std::move(factor)) {}

GpState GpState::fit(RbfKernel kernel, NoiseModel noise, Dataset data) {
  if (data.observations.size() != data.points.size()) {
    throw std::invalid_argument("GpState::fit: points and observations differ in length");
  }
  if (!data.noise_variances.empty() && data.noise_variances.size() != data.points.size()) {
    throw std::invalid_argument("GpState::fit: noise variances differ in length");
  }
  auto f = std::make_shared<Factor>(std::move(kernel), std::move(noise));
  if (data.noise_variances.empty()) {
    for (const auto& p : data.points) data.noise_variances.push_back(f->noise.variance_at(p));
  }
  const auto d = static_cast<Eigen::Index>(f->kernel.dim());
  f->inputs.resize(d, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    f->check_point(data.points[i]);
    f->inputs.col(static_cast<Eigen::Index>(i)) = data.points[i];
  }
  f->data = std::move(data);
  if (!f->data.empty()) {
    f->refactor();
    f->solve_alpha();
  }
  return GpState(std::shared_ptr<const Factor>(std::move(f)));
}

const RbfKernel& GpState::kernel() const { return factor_->kernel; }
const NoiseModel& GpState::noise() const { return factor_->noise; }
const Dataset& GpState::data() const { return factor_->data; }
std::size_t GpState::size() const { return factor_->data.size(); }
double GpState::jitter() const { return factor_->jitter; }
const Eigen::MatrixXd& GpState::cholesky() const { return factor_->chol; }
std::uint64_t GpState::lineage() const { return factor_->lineage; }

double GpState::noise_variance(const Point& x) const { return factor_->noise.variance_at(x); }
double GpState::prior_variance(const Point&) const { return factor_->kernel.outputscale(); }

Posterior GpState::posterior(const Point& x) const {
  const Factor& f = *factor_;
  f.check_point(x);
  const double prior = f.kernel.outputscale();
  if (f.data.empty()) return {0.0, prior};
  const Eigen::VectorXd k = f.kernel.column(f.inputs, x);
  const Eigen::VectorXd v = f.project(k);
  return {k.dot(f.alpha), std::max(0.0, prior - v.squaredNorm())};
}

BatchPosterior GpState::posterior(const Eigen::MatrixXd& points) const {
  const Factor& f = *factor_;
  if (points.rows() != static_cast<Eigen::Index>(f.kernel.dim())) {
    throw std::invalid_argument("GpState::posterior: batch dimension mismatch");
  }
  BatchPosterior out;
  const Eigen::Index m = points.cols();
  const double prior = f.kernel.outputscale();
  if (f.data.empty()) {
    out.mean = Eigen::VectorXd::Zero(m);
    out.variance = Eigen::VectorXd::Constant(m, prior);
    out.projected.resize(0, m);
    return out;
  }
  out.projected = f.kernel.cross(f.inputs, points);
  out.mean = out.projected.transpose() * f.alpha;
  f.lower().solveInPlace(out.projected);
  out.variance =
      (prior - out.projected.colwise().squaredNorm().transpose().array()).max(0.0).matrix();
  return out;
}

BatchPosterior GpState::marginals(const Eigen::MatrixXd& points) const {
  const Factor& f = *factor_;
  if (points.rows() != static_cast<Eigen::Index>(f.kernel.dim())) {
    throw std::invalid_argument("GpState::marginals: batch dimension mismatch");
  }
  const Eigen::Index m = points.cols();
  if (f.data.empty()) return posterior(points);
  const Eigen::VectorXd inv_l = f.kernel.lengthscales().cwiseInverse();
  const Eigen::VectorXd lo = f.inputs.rowwise().minCoeff();
  const Eigen::VectorXd hi = f.inputs.rowwise().maxCoeff();
  const double reach2 = kPriorReach * kPriorReach;
  const Eigen::Index d = points.rows();
  std::vector<Eigen::Index> near;
  near.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    double gap2 = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      const double p = points(i, j);
      const double g = (p < lo[i] ? lo[i] - p : p > hi[i] ? p - hi[i] : 0.0) * inv_l[i];
      gap2 += g * g;
    }
    if (gap2 <= reach2) near.push_back(j);
  }
  if (static_cast<Eigen::Index>(near.size()) == m) {
    BatchPosterior out = posterior(points);
    out.projected.resize(0, m);
    return out;
  }
  BatchPosterior out;
  out.mean = Eigen::VectorXd::Zero(m);
  out.variance = Eigen::VectorXd::Constant(m, f.kernel.outputscale());
  out.projected.resize(0, m);
  if (near.empty()) return out;
  Eigen::MatrixXd sub(points.rows(), static_cast<Eigen::Index>(near.size()));
  for (std::size_t k = 0; k < near.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = points.col(near[k]);
  const BatchPosterior inner = posterior(sub);
  for (std::size_t k = 0; k < near.size(); ++k) {
    out.mean[near[k]] = inner.mean[static_cast<Eigen::Index>(k)];
    out.variance[near[k]] = inner.variance[static_cast<Eigen::Index>(k)];
  }
  return out;
}

JointPosterior GpState::joint(const Point& x, const Point& z) const {
  const Factor& f = *factor_;
  f.check_point(x);
  f.check_point(z);
  const double prior = f.kernel.outputscale();
  JointPosterior j;
  j.cov = f.kernel(x, z);
  j.var_x = prior;
  j.var_z = prior;
  if (f.data.empty()) return j;
  const Eigen::VectorXd kx = f.kernel.column(f.inputs, x);
  const Eigen::VectorXd kz = f.kernel.column(f.inputs, z);
  const Eigen::VectorXd vx = f.project(kx);
  const Eigen::VectorXd vz = f.project(kz);
  j.mean_x = kx.dot(f.alpha);
  j.mean_z = kz.dot(f.alpha);
  j.var_x = std::max(0.0, prior - vx.squaredNorm());
  j.var_z = std::max(0.0, prior - vz.squaredNorm());
  j.cov -= vx.dot(vz);
  return j;
}

JointPosteriorGradient GpState::joint_with_gradient(const Point& x, const Point& z) const {
  const Factor& f = *factor_;
  f.check_point(x);
  f.check_point(z);
  const double prior = f.kernel.outputscale();
  const Eigen::VectorXd inv_l2 = f.kernel.lengthscales().array().square().inverse();

  JointPosteriorGradient g;
  const double kxz = f.kernel(x, z);
  const Eigen::VectorXd dkxz_dx = (-kxz * (x - z).array() * inv_l2.array()).matrix();
  g.value.cov = kxz;
  g.value.var_x = prior;
  g.value.var_z = prior;
  const auto d = x.size();
  g.dvar_x_dx = Eigen::VectorXd::Zero(d);
  g.dmean_z_dz = Eigen::VectorXd::Zero(d);
  g.dvar_z_dz = Eigen::VectorXd::Zero(d);
  g.dcov_dx = dkxz_dx;
  g.dcov_dz = -dkxz_dx;
  if (f.data.empty()) return g;

  const Eigen::VectorXd kx = f.kernel.column(f.inputs, x);
  const Eigen::VectorXd kz = f.kernel.column(f.inputs, z);
  const Eigen::VectorXd vx = f.project(kx);
  const Eigen::VectorXd vz = f.project(kz);
  const auto upper = f.chol.triangularView<Eigen::Lower>().transpose();
  const Eigen::VectorXd wx = upper.solve(vx);
  const Eigen::VectorXd wz = upper.solve(vz);
  const Eigen::MatrixXd dkx = f.kernel.column_gradient(f.inputs, x, kx);
  const Eigen::MatrixXd dkz = f.kernel.column_gradient(f.inputs, z, kz);

  g.value.mean_x = kx.dot(f.alpha);
  g.value.mean_z = kz.dot(f.alpha);
  g.value.var_x = std::max(0.0, prior - vx.squaredNorm());
  g.value.var_z = std::max(0.0, prior - vz.squaredNorm());
  g.value.cov -= vx.dot(vz);

  g.dvar_x_dx = -2.0 * dkx.transpose() * wx;
  g.dmean_z_dz = dkz.transpose() * f.alpha;
  g.dvar_z_dz = -2.0 * dkz.transpose() * wz;
  g.dcov_dx -= dkx.transpose() * wz;
  g.dcov_dz -= dkz.transpose() * wx;
  return g;
}

double GpState::covariance(const Point& x, const Point& z) const { return joint(x, z).cov; }

double GpState::cross_correlation(const Point& x, const Point& z) const {
  const JointPosterior j = joint(x, z);
  const double floor = kDegenerateVarianceFraction * factor_->kernel.outputscale();
  if (j.var_x <= floor || j.var_z <= floor) return 0.0;
  return std::clamp(j.cov / std::sqrt(j.var_x * j.var_z), -1.0, 1.0);
}

GpState GpState::condition(const Point& x, double y) const {
  return condition(x, y, factor_->noise.variance_at(x));
}

GpState GpState::condition(const Point& x, double y, double noise_variance) const {
  const Factor& old = *factor_;
  old.check_point(x);
  if (!(noise_variance > 0.0)) throw std::invalid_argument("GpState::condition: noise variance must be positive");
  if (!std::isfinite(y)) throw NumericalError("GpState::condition: non-finite observation");

  auto f = std::make_shared<Factor>(old.kernel, old.noise);
  f->data = old.data;
  f->data.points.push_back(x);
  f->data.observations.push_back(y);
  f->data.noise_variances.push_back(noise_variance);
  const Eigen::Index n = old.inputs.cols();
  f->inputs.resize(old.inputs.rows(), n + 1);
  f->inputs.leftCols(n) = old.inputs;
  f->inputs.col(n) = x;

  bool extended = false;
  if (n > 0 && old.extensions + 1 < kRefactorPeriod) {
    const Eigen::VectorXd k = old.kernel.column(old.inputs, x);
    const Eigen::VectorXd l = old.project(k);
    const double pivot = old.kernel.outputscale() + noise_variance + old.jitter - l.squaredNorm();
    if (pivot > 1e-12 * (old.kernel.outputscale() + noise_variance)) {
      f->chol.resize(n + 1, n + 1);
      f->chol.topLeftCorner(n, n) = old.chol;
      f->chol.topRightCorner(n, 1).setZero();
      f->chol.bottomLeftCorner(1, n) = l.transpose();
      f->chol(n, n) = std::sqrt(pivot);
      f->jitter = old.jitter;
      f->extensions = old.extensions + 1;
      f->lineage = old.lineage;
      extended = true;
    }
  }
  if (!extended) f->refactor();
  f->solve_alpha();
  return GpState(std::shared_ptr<const Factor>(std::move(f)));
}

}  // namespace safex
