#include "safex/environments.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>

#include "safex/gp.hpp"

namespace safex {

namespace {

void require_in_box(const Box& domain, const Point& seed) {
  if (seed.size() != static_cast<Eigen::Index>(domain.dim()) || !domain.contains(seed, 1e-12)) {
    throw std::invalid_argument("Environment: safe seed outside the domain");
  }
}

}  // namespace

Environment::Environment(std::string name, Box domain, Point seed, NoiseModel noise,
                         std::uint64_t noise_seed)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      seed_(std::move(seed)),
      noise_(std::move(noise)),
      rng_(noise_seed) {
  require_in_box(domain_, seed_);
}

double Environment::observe(const Point& x) { return observe(x, rng_); }

double Environment::observe(const Point& x, std::mt19937_64& rng) const {
  const double f = constraint(x);
  if (!std::isfinite(f)) throw EnvironmentError(name_ + ": non-finite constraint value");
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_.variance_at(x)));
  return f + normal(rng);
}

Eigen::VectorXd Environment::constraint(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) out[j] = constraint(Point(points.col(j)));
  return out;
}

std::vector<Point> Environment::landmarks() const { return {seed_}; }

GpSampleEnvironment::GpSampleEnvironment(const RbfKernel& kernel, const GridDomain& lattice,
                                         const Box& domain, Point seed, NoiseModel noise,
                                         std::uint64_t sample_seed, std::uint64_t noise_seed)
    : Environment("gp_sample", domain, std::move(seed), std::move(noise), noise_seed),
      kernel_(kernel),
      points_(lattice.points()) {
  const Eigen::Index m = points_.cols();
  const Eigen::MatrixXd gram = kernel_.gram(points_);
  const double scale = kernel_.outputscale();
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = GpState::kInitialJitter * scale;
  for (;; jitter *= 2.0) {
    if (jitter > GpState::kMaxJitter * scale * (1.0 + 1e-12)) {
      throw NumericalError("gp_sample: lattice Gram matrix is not positive definite");
    }
    llt.compute(gram + jitter * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() == Eigen::Success) break;
  }

  std::mt19937_64 rng(sample_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd k_seed = kernel_.column(points_, this->seed());
  for (redraws_ = 0;; ++redraws_) {
    if (redraws_ >= kMaxRedraws) {
      throw EnvironmentError("gp_sample: no draw with f(seed) > 0 after 100 redraws");
    }
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z[i] = normal(rng);
    sample_ = llt.matrixL() * z;
    // Interpolate the draw exactly: solve gram * w = sample by refining the
    // jittered solution.
    weights_ = llt.solve(sample_);
    for (int it = 0; it < 5; ++it) weights_ += llt.solve(sample_ - gram * weights_);
    if (k_seed.dot(weights_) > 0.0) break;
  }
}

double GpSampleEnvironment::constraint(const Point& x) const {
  return kernel_.column(points_, x).dot(weights_);
}

Eigen::VectorXd GpSampleEnvironment::constraint(const Eigen::MatrixXd& points) const {
  Eigen::VectorXd out(points.cols());
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index start = 0; start < points.cols(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, points.cols() - start);
    out.segment(start, len) =
        kernel_.cross(points.middleCols(start, len), points_) * weights_;
  }
  return out;
}

std::vector<Point> GpSampleEnvironment::landmarks() const {
  std::vector<Point> out{seed()};
  Eigen::Index best = 0;
  sample_.maxCoeff(&best);
  out.emplace_back(points_.col(best));
  return out;
}

ExponentialEnvironment::ExponentialEnvironment(Box domain, Point seed, double noise_variance,
                                               std::uint64_t noise_seed)
    : Environment("exponential", std::move(domain), std::move(seed),
                  NoiseModel::homoskedastic(noise_variance), noise_seed) {
  if (this->domain().dim() != 1) throw std::invalid_argument("exponential: domain must be 1D");
}

double ExponentialEnvironment::constraint(const Point& x) const {
  return std::exp(-x[0]) + 0.05;
}

std::vector<Point> ExponentialEnvironment::landmarks() const {
  return {seed(), domain().lower()};
}

BumpEnvironment::BumpEnvironment(BumpKind kind, Box domain, Point seed, NoiseModel noise,
                                 std::uint64_t noise_seed)
    : Environment(kind == BumpKind::fived ? "bump5" : "heteroskedastic", std::move(domain),
                  std::move(seed), std::move(noise), noise_seed),
      kind_(kind) {
  const auto d = static_cast<Eigen::Index>(this->domain().dim());
  x1_ = Point::Zero(d);
  x2_ = Point::Zero(d);
  x1_[0] = 2.7;
  x2_[0] = 6.0;
}

double BumpEnvironment::constraint(const Point& x) const {
  const double r0 = x.squaredNorm();
  if (kind_ == BumpKind::fived) {
    return std::exp(-r0) + 2.0 * std::exp(-(x - x1_).squaredNorm()) +
           5.0 * std::exp(-(x - x2_).squaredNorm()) - 0.2;
  }
  return 0.5 * std::exp(-r0) + std::exp(-(x - x1_).squaredNorm()) +
         std::exp(-(x + x1_).squaredNorm()) + 3.0 * std::exp(-(x - x2_).squaredNorm()) +
         3.0 * std::exp(-(x + x2_).squaredNorm()) + 0.2;
}

std::vector<Point> BumpEnvironment::landmarks() const {
  std::vector<Point> out{seed(), x1_, x2_};
  if (kind_ == BumpKind::heteroskedastic) {
    out.emplace_back(-x1_);
    out.emplace_back(-x2_);
  }
  std::vector<Point> inside;
  for (auto& p : out) inside.push_back(domain().clamp(p));
  return inside;
}

PendulumEnvironment::PendulumEnvironment(PendulumParams params, Box domain, Point seed,
                                         double noise_variance, std::uint64_t noise_seed)
    : Environment("pendulum", std::move(domain), std::move(seed),
                  NoiseModel::homoskedastic(noise_variance), noise_seed),
      params_(params) {
  if (this->domain().dim() != 2) throw std::invalid_argument("pendulum: domain must be 2D");
}

double PendulumEnvironment::constraint(const Point& x) const {
  const ControllerEpisode e = simulate_pendulum(params_, Eigen::Vector2d(x[0], x[1]));
  if (!e.finite) return -std::numeric_limits<double>::infinity();
  return pendulum_constraint(params_, e);
}

CartPoleEnvironment::CartPoleEnvironment(CartPoleParams params, Box domain, Point seed,
                                         double noise_variance, std::uint64_t noise_seed)
    : Environment("cartpole", std::move(domain), std::move(seed),
                  NoiseModel::homoskedastic(noise_variance), noise_seed),
      params_(params) {
  if (this->domain().dim() != 3) throw std::invalid_argument("cartpole: domain must be 3D");
}

double CartPoleEnvironment::constraint(const Point& x) const {
  const ControllerEpisode e = simulate_cartpole(params_, Eigen::Vector3d(x[0], x[1], x[2]));
  if (!e.finite) return -std::numeric_limits<double>::infinity();
  return cartpole_constraint(params_, e);
}

}  // namespace safex
