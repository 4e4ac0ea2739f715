#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "safex/gp.hpp"
#include "safex/posterior_cache.hpp"

namespace safex {
namespace {

Point p2(double a, double b) {
  Point p(2);
  p << a, b;
  return p;
}

TEST(RbfKernel, GramIsSymmetricPositiveSemiDefinite) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  const RbfKernel k(Eigen::Vector2d(0.7, 1.3), 2.0);
  Eigen::MatrixXd X(2, 30);
  for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j) = p2(u(rng), u(rng));
  const Eigen::MatrixXd K = k.gram(X);
  EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
  EXPECT_DOUBLE_EQ(k(X.col(0), X.col(0)), 2.0);
}

TEST(RbfKernel, MetricMatchesDefinition) {
  const RbfKernel k(Eigen::VectorXd::Constant(1, 0.5), 3.0);
  Point a = Point::Constant(1, 0.1), b = Point::Constant(1, 0.9);
  const double direct = std::sqrt(k(a, a) + k(b, b) - 2 * k(a, b));
  EXPECT_NEAR(k.metric(a, b), direct, 1e-12);
  EXPECT_EQ(k.metric(a, a), 0.0);
}

TEST(GpState, PriorIsZeroMeanWithOutputscaleVariance) {
  const GpState gp(RbfKernel(Eigen::Vector2d(1, 1), 4.0), NoiseModel::homoskedastic(0.1));
  const Posterior p = gp.posterior(p2(0.3, -0.2));
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(p.variance, 4.0);
}

TEST(GpState, MatchesDenseSolveOnRandomDatasets) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const RbfKernel k(Eigen::Vector2d(0.5 + u(rng) * 0.2, 0.8), 1.5);
    GpState gp(k, NoiseModel::homoskedastic(0.05));
    std::vector<Point> X;
    std::vector<double> y, nv;
    for (int i = 0; i < 3; ++i) {
      X.push_back(p2(u(rng), u(rng)));
      y.push_back(u(rng));
      nv.push_back(0.05);
      gp = gp.condition(X.back(), y.back());
    }
    for (int q = 0; q < 25; ++q) {
      const Point x = p2(-1 + q % 5 * 0.5, -1 + q / 5 * 0.5);
      const auto [m, v] = oracle::dense_posterior(k, X, y, nv, x);
      const Posterior p = gp.posterior(x);
      EXPECT_NEAR(p.mean, m, 1e-10);
      EXPECT_NEAR(p.variance, v, 1e-10);
    }
  }
}

TEST(GpState, IncrementalConditioningMatchesScratchFit) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  const RbfKernel k(Eigen::Vector2d(0.6, 0.6), 2.0);
  const NoiseModel noise = NoiseModel::half_space(0, 0.0, 0.05, 0.5);
  GpState gp(k, noise);
  Dataset data;
  // Crosses the refactor period to exercise both paths.
  for (int i = 0; i < 70; ++i) {
    const Point x = p2(u(rng), u(rng));
    const double y = std::sin(x[0]) + u(rng) * 0.1;
    gp = gp.condition(x, y);
    data.points.push_back(x);
    data.observations.push_back(y);
  }
  const GpState fit = GpState::fit(k, noise, data);
  for (int q = 0; q < 50; ++q) {
    const Point x = p2(u(rng), u(rng));
    EXPECT_NEAR(gp.posterior(x).mean, fit.posterior(x).mean, 1e-8);
    EXPECT_NEAR(gp.posterior(x).variance, fit.posterior(x).variance, 1e-8);
  }
}

TEST(GpState, ConditioningLeavesParentUntouched) {
  const GpState prior(RbfKernel(Eigen::Vector2d(1, 1), 1.0), NoiseModel::homoskedastic(0.1));
  const GpState post = prior.condition(p2(0, 0), 1.0);
  EXPECT_EQ(prior.size(), 0u);
  EXPECT_EQ(post.size(), 1u);
  EXPECT_EQ(prior.posterior(p2(0, 0)).mean, 0.0);
}

TEST(GpState, RepeatedPointsStayFactorizable) {
  GpState gp(RbfKernel(Eigen::Vector2d(1, 1), 150.0), NoiseModel::homoskedastic(1e-8));
  for (int i = 0; i < 60; ++i) gp = gp.condition(p2(0.1, 0.1), 1.0);
  EXPECT_TRUE(std::isfinite(gp.posterior(p2(0, 0)).mean));
  EXPECT_GE(gp.posterior(p2(0.1, 0.1)).variance, 0.0);
}

TEST(GpState, RejectsBadObservations) {
  const GpState gp(RbfKernel(Eigen::Vector2d(1, 1), 1.0), NoiseModel::homoskedastic(0.1));
  EXPECT_THROW(gp.condition(p2(0, 0), std::nan("")), NumericalError);
  EXPECT_THROW(gp.condition(p2(0, 0), 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(gp.posterior(Point(Point::Zero(3))), std::invalid_argument);
}

TEST(GpState, JointGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  GpState gp(RbfKernel(Eigen::Vector2d(0.4, 0.7), 2.0), NoiseModel::homoskedastic(0.05));
  for (int i = 0; i < 6; ++i) gp = gp.condition(p2(u(rng), u(rng)), u(rng));
  const Point x = p2(0.2, -0.3), z = p2(-0.4, 0.5);
  const JointPosteriorGradient g = gp.joint_with_gradient(x, z);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    Point xp = x, xm = x, zp = z, zm = z;
    xp[i] += h;
    xm[i] -= h;
    zp[i] += h;
    zm[i] -= h;
    EXPECT_NEAR(g.dvar_x_dx[i], (gp.joint(xp, z).var_x - gp.joint(xm, z).var_x) / (2 * h), 1e-6);
    EXPECT_NEAR(g.dcov_dx[i], (gp.joint(xp, z).cov - gp.joint(xm, z).cov) / (2 * h), 1e-6);
    EXPECT_NEAR(g.dcov_dz[i], (gp.joint(x, zp).cov - gp.joint(x, zm).cov) / (2 * h), 1e-6);
    EXPECT_NEAR(g.dmean_z_dz[i], (gp.joint(x, zp).mean_z - gp.joint(x, zm).mean_z) / (2 * h), 1e-6);
    EXPECT_NEAR(g.dvar_z_dz[i], (gp.joint(x, zp).var_z - gp.joint(x, zm).var_z) / (2 * h), 1e-6);
  }
}

TEST(GpState, CrossCorrelationIsBounded) {
  GpState gp(RbfKernel(Eigen::Vector2d(1, 1), 1.0), NoiseModel::homoskedastic(0.01));
  gp = gp.condition(p2(0, 0), 0.5);
  const double r = gp.cross_correlation(p2(0.1, 0), p2(0.2, 0));
  EXPECT_GT(r, 0.0);
  EXPECT_LE(r, 1.0);
  EXPECT_NEAR(gp.cross_correlation(p2(0.3, 0.1), p2(0.3, 0.1)), 1.0, 1e-12);
}

TEST(GpState, MarginalsMatchFullPosterior) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  GpState gp(RbfKernel(Eigen::Vector2d(0.1, 0.1), 150.0), NoiseModel::homoskedastic(0.05));
  for (int i = 0; i < 20; ++i) gp = gp.condition(p2(u(rng), u(rng)), u(rng) * 10);
  Eigen::MatrixXd P(2, 400);
  for (Eigen::Index j = 0; j < P.cols(); ++j) P.col(j) = p2(-2.5 + 0.25 * (j % 20), -2.5 + 0.25 * (j / 20));
  const BatchPosterior full = gp.posterior(P);
  const BatchPosterior part = gp.marginals(P);
  EXPECT_LT((full.mean - part.mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((full.variance - part.variance).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PosteriorCache, TracksIncrementalAndRefactoredStates) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd P(2, 600);
  for (Eigen::Index j = 0; j < P.cols(); ++j) P.col(j) = p2(u(rng) * 2.5, u(rng) * 2.5);
  GpState gp(RbfKernel(Eigen::Vector2d(0.3, 0.3), 5.0), NoiseModel::homoskedastic(0.05));
  PosteriorCache cache(P);
  for (int i = 0; i < 120; ++i) {
    gp = gp.condition(p2(u(rng) * 0.5 + i * 0.01, u(rng) * 0.5), u(rng));
    if (i % 7 == 3) continue;  // skip updates: several extensions at once
    const BatchPosterior& c = cache.update(gp);
    const BatchPosterior full = gp.posterior(P);
    ASSERT_LT((full.mean - c.mean).cwiseAbs().maxCoeff(), 1e-8) << "step " << i;
    ASSERT_LT((full.variance - c.variance).cwiseAbs().maxCoeff(), 1e-8) << "step " << i;
  }
}

TEST(PosteriorCache, RebuildsForUnrelatedState) {
  Eigen::MatrixXd P(2, 3);
  P << 0, 0.5, 1, 0, 0.5, 1;
  const GpState prior(RbfKernel(Eigen::Vector2d(1, 1), 1.0), NoiseModel::homoskedastic(0.1));
  PosteriorCache cache(P);
  const GpState root = prior.condition(p2(0, 0), 1.0);
  const GpState a = root.condition(p2(1, 1), 2.0);
  const GpState b = root.condition(p2(0.5, 0.5), -1.0);
  ASSERT_EQ(a.lineage(), b.lineage());
  cache.update(a);
  const BatchPosterior& c = cache.update(b);
  const BatchPosterior full = b.posterior(P);
  EXPECT_LT((full.mean - c.mean).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace safex
