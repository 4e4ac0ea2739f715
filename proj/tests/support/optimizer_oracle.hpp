#pragma once

#include <random>

#include "safex/acquisition.hpp"
#include "safex/entropy.hpp"
#include "safex/lattice.hpp"

namespace safex::oracle {

struct SmallState {
  GpState gp;
  SafetyModel safety;
  Box domain;
};

/// A GP over [-1, 1]^dim conditioned on a few positive observations near the
/// seed and some scattered ones, so the safe set is a proper subset.
inline SmallState random_small_state(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  const Box domain = Box::cube(dim, -1.0, 1.0);
  const double l = 0.25 + 0.25 * (u(rng) + 1.0);
  GpState gp(RbfKernel(Eigen::VectorXd::Constant(d, l), 1.0 + (u(rng) + 1.0)),
             NoiseModel::homoskedastic(0.01 + 0.05 * (u(rng) + 1.0)));
  Point seed(d);
  for (Eigen::Index i = 0; i < d; ++i) seed[i] = 0.5 * u(rng);
  const int near = 2 + static_cast<int>((u(rng) + 1.0) * 2.0);
  for (int k = 0; k < near; ++k) {
    Point x = seed;
    for (Eigen::Index i = 0; i < d; ++i) x[i] += 0.2 * u(rng);
    gp = gp.condition(domain.clamp(x), 1.0 + 0.5 * u(rng));
  }
  for (int k = 0; k < 2; ++k) {
    Point x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = u(rng);
    gp = gp.condition(x, 1.5 * u(rng));
  }
  return {gp, SafetyModel(seed), domain};
}

struct GridOptimum {
  double value = -1.0;
  Point x;
  Point z;
};

/// Exhaustive maximum of the mutual information over safe x and all z on a
/// per_dim^d lattice of the domain (plus the seed as an x candidate).
inline GridOptimum grid_max_mi(const GpState& gp, const SafetyModel& safety, std::size_t n,
                               const Box& domain, std::size_t per_dim = 41) {
  const GridDomain grid = GridDomain::box(domain, per_dim);
  const Eigen::MatrixXd& P = grid.points();
  const BatchPosterior post = gp.posterior(P);
  const std::vector<bool> safe = safe_mask(post, safety, n, P);
  std::vector<Point> xs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (safe[i]) xs.push_back(grid.point(i));
  }
  xs.push_back(safety.seed());
  GridOptimum best;
  for (const Point& x : xs) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const Point z = grid.point(j);
      const double v = mutual_info(gp, x, z);
      if (v > best.value) best = {v, x, z};
    }
  }
  return best;
}

}  // namespace safex::oracle
