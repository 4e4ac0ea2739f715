#include <gtest/gtest.h>

#include "safex/safety.hpp"

namespace safex {
namespace {

Point p1(double a) { return Point::Constant(1, a); }

GpState fitted() {
  GpState gp(RbfKernel(Eigen::VectorXd::Constant(1, 1.0), 1.0), NoiseModel::homoskedastic(0.01));
  return gp.condition(p1(0.0), 2.0);
}

TEST(SafetyModel, SeedIsAlwaysSafe) {
  const GpState gp(RbfKernel(Eigen::VectorXd::Constant(1, 1.0), 1.0),
                   NoiseModel::homoskedastic(0.01));
  const SafetyModel s(p1(0.5));
  EXPECT_TRUE(is_safe(gp, s, 0, p1(0.5)));
  EXPECT_FALSE(is_safe(gp, s, 0, p1(0.6)));
}

TEST(SafetyModel, LowerBoundDecidesSafety) {
  const GpState gp = fitted();
  const SafetyModel s(p1(5.0), 2.0);
  for (double x : {-1.0, -0.3, 0.0, 0.4, 1.5}) {
    const Posterior p = gp.posterior(p1(x));
    EXPECT_EQ(is_safe(gp, s, 0, p1(x)), p.mean - 2.0 * p.stddev() >= 0.0) << x;
    const ConfidenceInterval ci = confidence_interval(gp, s, 0, p1(x));
    EXPECT_NEAR(ci.upper - ci.lower, 4.0 * p.stddev(), 1e-12);
  }
}

TEST(SafetyModel, ThresholdShiftsTheTest) {
  const GpState gp = fitted();
  const Posterior p = gp.posterior(p1(0.0));
  const double lcb = p.mean - 2.0 * p.stddev();
  EXPECT_TRUE(is_safe(gp, SafetyModel(p1(9), 2.0, lcb - 1e-9), 0, p1(0.0)));
  EXPECT_FALSE(is_safe(gp, SafetyModel(p1(9), 2.0, lcb + 1e-9), 0, p1(0.0)));
}

TEST(SafetyModel, ScheduleIsIndexedAndClamped) {
  const SafetyModel s = SafetyModel::with_schedule(p1(0), {1.0, 2.0, 3.0});
  EXPECT_EQ(s.beta(0), 1.0);
  EXPECT_EQ(s.beta(2), 3.0);
  EXPECT_EQ(s.beta(100), 3.0);
  EXPECT_THROW(SafetyModel::with_schedule(p1(0), {2.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(SafetyModel::with_schedule(p1(0), {}), std::invalid_argument);
  EXPECT_THROW(SafetyModel(p1(0), -1.0), std::invalid_argument);
}

TEST(SafetyModel, BatchMaskAgreesWithPointwise) {
  const GpState gp = fitted();
  const SafetyModel s(p1(3.0));
  Eigen::MatrixXd P(1, 61);
  for (Eigen::Index j = 0; j < P.cols(); ++j) P(0, j) = -3.0 + 0.1 * static_cast<double>(j);
  const auto mask = safe_mask(gp, s, 0, P);
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    EXPECT_EQ(mask[static_cast<std::size_t>(j)], is_safe(gp, s, 0, Point(P.col(j))));
  }
}

TEST(SafetyModel, PosteriorMeanStaysWithinBound) {
  GpState gp(RbfKernel(Eigen::VectorXd::Constant(1, 0.5), 4.0), NoiseModel::homoskedastic(0.1));
  for (int i = 0; i < 10; ++i) gp = gp.condition(p1(0.2 * i), std::sin(i));
  Eigen::MatrixXd probes(1, 50);
  for (Eigen::Index j = 0; j < 50; ++j) probes(0, j) = -1.0 + 0.08 * static_cast<double>(j);
  EXPECT_TRUE(posterior_mean_bound_check(gp, SafetyModel(p1(0)), 0, probes));
}

}  // namespace
}  // namespace safex
