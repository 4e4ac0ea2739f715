#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "safex/gp.hpp"
#include "safex/types.hpp"

namespace safex {

/// beta schedule, safe seed x0 and safety threshold c. A point is safe when
/// mu_n(x) - beta_n sigma_n(x) >= c, and x0 is always safe.
class SafetyModel {
 public:
  static constexpr double kSeedTolerance = 1e-12;
  static constexpr double kDefaultBeta = 2.0;

  SafetyModel(Point seed, double beta = kDefaultBeta, double threshold = 0.0);

  /// beta_n = schedule[min(n, size - 1)]; the schedule must be non-negative and
  /// non-decreasing.
  static SafetyModel with_schedule(Point seed, std::vector<double> schedule,
                                   double threshold = 0.0);

  double beta(std::size_t n) const;
  const Point& seed() const { return seed_; }
  double threshold() const { return threshold_; }
  bool is_seed(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Same schedule and threshold with a different seed.
  SafetyModel with_seed(Point seed) const;

 private:
  SafetyModel() = default;

  Point seed_;
  std::vector<double> schedule_;
  double threshold_ = 0.0;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
};

ConfidenceInterval confidence_interval(const GpState& gp, const SafetyModel& s, std::size_t n,
                                       const Point& x);

bool is_safe(const GpState& gp, const SafetyModel& s, std::size_t n, const Point& x);

/// is_safe for every column of `points`, computed from one batch posterior.
std::vector<bool> safe_mask(const GpState& gp, const SafetyModel& s, std::size_t n,
                            const Eigen::MatrixXd& points);
std::vector<bool> safe_mask(const BatchPosterior& post, const SafetyModel& s, std::size_t n,
                            const Eigen::MatrixXd& points);

/// |mu_n(x)| <= 2 beta_n sigma_0(x) on every probe (columns of `probes`).
bool posterior_mean_bound_check(const GpState& gp, const SafetyModel& s, std::size_t n,
                                const Eigen::MatrixXd& probes);

}  // namespace safex
