#include "safex/safety.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace safex {

SafetyModel::SafetyModel(Point seed, double beta, double threshold)
    : SafetyModel(with_schedule(std::move(seed), {beta}, threshold)) {}

SafetyModel SafetyModel::with_schedule(Point seed, std::vector<double> schedule,
                                       double threshold) {
  if (schedule.empty()) throw std::invalid_argument("SafetyModel: empty beta schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] >= 0.0) || !std::isfinite(schedule[i])) {
      throw std::invalid_argument("SafetyModel: beta must be finite and non-negative");
    }
    if (i > 0 && schedule[i] < schedule[i - 1]) {
      throw std::invalid_argument("SafetyModel: beta schedule must be non-decreasing");
    }
  }
  SafetyModel s;
  s.seed_ = std::move(seed);
  s.schedule_ = std::move(schedule);
  s.threshold_ = threshold;
  return s;
}

double SafetyModel::beta(std::size_t n) const {
  return schedule_[std::min(n, schedule_.size() - 1)];
}

bool SafetyModel::is_seed(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != seed_.size()) return false;
  return ((x - seed_).array().abs() <= kSeedTolerance).all();
}

SafetyModel SafetyModel::with_seed(Point seed) const {
  SafetyModel s = *this;
  s.seed_ = std::move(seed);
  return s;
}

ConfidenceInterval confidence_interval(const GpState& gp, const SafetyModel& s, std::size_t n,
                                       const Point& x) {
  const Posterior p = gp.posterior(x);
  const double half = s.beta(n) * p.stddev();
  return {p.mean - half, p.mean + half};
}

bool is_safe(const GpState& gp, const SafetyModel& s, std::size_t n, const Point& x) {
  if (s.is_seed(x)) return true;
  return confidence_interval(gp, s, n, x).lower >= s.threshold();
}

std::vector<bool> safe_mask(const BatchPosterior& post, const SafetyModel& s, std::size_t n,
                            const Eigen::MatrixXd& points) {
  const double beta = s.beta(n);
  std::vector<bool> mask(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double lower = post.mean[j] - beta * std::sqrt(std::max(0.0, post.variance[j]));
    mask[static_cast<std::size_t>(j)] =
        lower >= s.threshold() || s.is_seed(points.col(j));
  }
  return mask;
}

std::vector<bool> safe_mask(const GpState& gp, const SafetyModel& s, std::size_t n,
                            const Eigen::MatrixXd& points) {
  return safe_mask(gp.posterior(points), s, n, points);
}

bool posterior_mean_bound_check(const GpState& gp, const SafetyModel& s, std::size_t n,
                                const Eigen::MatrixXd& probes) {
  const BatchPosterior post = gp.posterior(probes);
  const double bound = 2.0 * s.beta(n) * std::sqrt(gp.kernel().outputscale());
  return (post.mean.array().abs() <= bound).all();
}

}  // namespace safex
