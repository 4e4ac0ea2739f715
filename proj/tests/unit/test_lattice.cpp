#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "safex/lattice.hpp"

namespace safex {
namespace {

TEST(GridDomain, BoxIncludesFacesAndIndexesFirstAxisFastest) {
  const GridDomain g = GridDomain::box(Box(Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 1)), {3, 5});
  EXPECT_EQ(g.size(), 15u);
  EXPECT_TRUE(g.point(0).isApprox(Eigen::Vector2d(0, -1)));
  EXPECT_TRUE(g.point(1).isApprox(Eigen::Vector2d(0.5, -1)));
  EXPECT_TRUE(g.point(3).isApprox(Eigen::Vector2d(0, -0.5)));
  EXPECT_TRUE(g.point(14).isApprox(Eigen::Vector2d(1, 1)));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.flat_index(g.multi_index(i)), i);
}

TEST(GridDomain, NearestIndexRoundsAndClamps) {
  const GridDomain g = GridDomain::box(Box::cube(1, 0, 1), 11);
  EXPECT_EQ(g.nearest_index(Point::Constant(1, 0.34)), 3u);
  EXPECT_EQ(g.nearest_index(Point::Constant(1, -4.0)), 0u);
  EXPECT_EQ(g.nearest_index(Point::Constant(1, 7.0)), 10u);
}

TEST(GridDomain, SegmentEndpoints) {
  const GridDomain g = GridDomain::segment(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 2, 3), 5);
  EXPECT_EQ(g.size(), 5u);
  EXPECT_EQ(g.axes(), 1u);
  EXPECT_TRUE(g.point(4).isApprox(Eigen::Vector3d(1, 2, 3)));
  EXPECT_TRUE(g.point(2).isApprox(Eigen::Vector3d(0.5, 1, 1.5)));
}

TEST(GridDomain, RejectsDegenerateCounts) {
  EXPECT_ANY_THROW(GridDomain::box(Box::cube(2, 0, 1), 1));
}

TEST(DistanceTransform, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution site(0.05);
  std::uniform_real_distribution<double> w(0.2, 3.0);
  for (int trial = 0; trial < 8; ++trial) {
    const std::vector<std::size_t> counts = trial % 2 ? std::vector<std::size_t>{13, 9, 4}
                                                      : std::vector<std::size_t>{40, 17};
    const GridDomain g = GridDomain::box(Box::cube(counts.size(), 0, 1), counts);
    Eigen::VectorXd weights(static_cast<Eigen::Index>(counts.size()));
    for (Eigen::Index k = 0; k < weights.size(); ++k) weights[k] = w(rng);
    std::vector<bool> sites(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) sites[i] = site(rng);
    const auto dt = squared_distance_transform(g, sites, weights);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      const auto a = g.multi_index(i);
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (!sites[j]) continue;
        const auto b = g.multi_index(j);
        double r2 = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
          const double t = weights[static_cast<Eigen::Index>(k)] *
                           (static_cast<double>(a[k]) - static_cast<double>(b[k]));
          r2 += t * t;
        }
        best = std::min(best, r2);
      }
      if (std::isinf(best)) {
        EXPECT_TRUE(std::isinf(dt[i]));
      } else {
        EXPECT_NEAR(dt[i], best, 1e-9 * (1 + best));
      }
    }
  }
}

TEST(DistanceTransform, NoSitesIsInfinite) {
  const GridDomain g = GridDomain::box(Box::cube(2, 0, 1), 5);
  const auto dt = squared_distance_transform(g, std::vector<bool>(g.size(), false),
                                             Eigen::Vector2d(1, 1));
  for (double v : dt) EXPECT_TRUE(std::isinf(v));
}

TEST(GridDomain, ScaledStepsUseLengthscales) {
  const GridDomain g = GridDomain::box(Box::cube(2, 0, 1), 11);
  const RbfKernel k(Eigen::Vector2d(0.1, 0.5), 2.0);
  const Eigen::VectorXd s = g.scaled_steps(k);
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 0.2, 1e-12);
}

}  // namespace
}  // namespace safex
