#include <gtest/gtest.h>

#include <random>

#include "optimizer_oracle.hpp"
#include "safex/acquisition.hpp"
#include "safex/entropy.hpp"

namespace safex {
namespace {

TEST(JointSearchSpace, FullBoxRoundTrips) {
  const Box box(Eigen::Vector2d(-1, 0), Eigen::Vector2d(1, 4));
  const JointSearchSpace s = JointSearchSpace::full(box);
  EXPECT_EQ(s.params(), 4u);
  Eigen::Vector4d u(0.25, 0.5, 1.0, 0.0);
  EXPECT_TRUE(s.x_of(u).isApprox(Eigen::Vector2d(-0.5, 2.0)));
  EXPECT_TRUE(s.z_of(u).isApprox(Eigen::Vector2d(1.0, 0.0)));
  const auto back = s.x_params_of(Eigen::Vector2d(-0.5, 2.0));
  ASSERT_TRUE(back.has_value());
  EXPECT_NEAR((*back - Eigen::Vector2d(0.25, 0.5)).norm(), 0.0, 1e-12);
}

TEST(JointSearchSpace, LineRejectsPointsOffTheImage) {
  const JointSearchSpace s = JointSearchSpace::affine(
      Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  EXPECT_TRUE(s.x_params_of(Eigen::Vector2d(0.5, 0.5)).has_value());
  EXPECT_FALSE(s.x_params_of(Eigen::Vector2d(0.5, 0.0)).has_value());
}

TEST(MiGradient, AnalyticMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto st = oracle::random_small_state(rng, 2);
    const JointSearchSpace space = JointSearchSpace::full(st.domain);
    Eigen::VectorXd p(4);
    for (int k = 0; k < 4; ++k) p[k] = u(rng);
    const MiGradient a = mi_gradient(st.gp, space, p, true, 1e-6);
    const MiGradient f = mi_gradient(st.gp, space, p, false, 1e-6);
    EXPECT_NEAR(a.value, f.value, 1e-12);
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(a.gradient[k], f.gradient[k], 1e-5 * (1 + std::abs(f.gradient[k]))) << k;
    }
  }
}

TEST(SelectNext, ReachesGridOptimumAndStaysSafe) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t dim = trial % 2 ? 2 : 1;
    const auto st = oracle::random_small_state(rng, dim);
    OptimizerSettings settings;
    settings.seed = static_cast<std::uint64_t>(trial);
    const AcquisitionChoice c = select_next(st.gp, st.safety, 0, st.domain, settings);
    const auto grid = oracle::grid_max_mi(st.gp, st.safety, 0, st.domain, dim == 1 ? 201 : 21);
    EXPECT_TRUE(is_safe(st.gp, st.safety, 0, c.x));
    EXPECT_GE(c.value, 0.99 * grid.value) << "trial " << trial;
    EXPECT_NEAR(c.value, mutual_info(st.gp, c.x, c.z), 1e-12);
  }
}

TEST(SelectNext, FreshPriorReturnsSeed) {
  const GpState gp(RbfKernel(Eigen::VectorXd::Constant(1, 1.0), 1.0),
                   NoiseModel::homoskedastic(0.05));
  const SafetyModel s(Point::Constant(1, 0.3));
  const AcquisitionChoice c = select_next(gp, s, 0, Box::cube(1, -2, 2), {});
  EXPECT_NEAR(c.x[0], 0.3, 1e-12);
  EXPECT_GT(c.value, 0.0);
}

TEST(SelectNext, DeterministicForFixedSeed) {
  std::mt19937_64 rng(4);
  const auto st = oracle::random_small_state(rng, 2);
  OptimizerSettings settings;
  settings.seed = 42;
  const auto a = select_next(st.gp, st.safety, 0, st.domain, settings);
  const auto b = select_next(st.gp, st.safety, 0, st.domain, settings);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.value, b.value);
}

TEST(SelectNext, DominatesRandomSafeCandidatesOnExponential) {
  GpState gp(RbfKernel(Eigen::VectorXd::Constant(1, 1.2), 100.0), NoiseModel::homoskedastic(0.05));
  for (double x : {0.0, 0.5, -1.0, 1.0}) gp = gp.condition(Point::Constant(1, x), std::exp(-x) + 0.05);
  const SafetyModel s(Point::Constant(1, 0.0));
  const Box box = Box::cube(1, -5, 5);
  const AcquisitionChoice c = select_next(gp, s, 4, box, {});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5, 5);
  int compared = 0;
  while (compared < 100) {
    const Point x = Point::Constant(1, u(rng));
    if (!is_safe(gp, s, 4, x)) continue;
    const Point z = Point::Constant(1, u(rng));
    EXPECT_GE(c.value, mutual_info(gp, x, z));
    ++compared;
  }
}

TEST(SelectNext, ValueRespectsLowerBound) {
  // The optimum is at least b(max safe variance) with M the largest safe |mean|.
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    const auto st = oracle::random_small_state(rng, 1);
    const GridDomain grid = GridDomain::box(st.domain, 201);
    const BatchPosterior post = st.gp.posterior(grid.points());
    const auto safe = safe_mask(post, st.safety, 0, grid.points());
    double vmax = 0.0, M = 0.0, nv = st.gp.noise().max_variance();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!safe[i]) continue;
      vmax = std::max(vmax, post.variance[static_cast<Eigen::Index>(i)]);
      M = std::max(M, std::abs(post.mean[static_cast<Eigen::Index>(i)]));
    }
    if (vmax <= 0.0) continue;
    const AcquisitionChoice c = select_next(st.gp, st.safety, 0, st.domain, {});
    EXPECT_GE(c.value, 0.99 * b_function(vmax, M, nv));
  }
}

}  // namespace
}  // namespace safex
