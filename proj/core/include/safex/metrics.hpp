#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "safex/environments.hpp"
#include "safex/gp.hpp"
#include "safex/safety.hpp"

namespace safex {

/// Points used to estimate coverage, with their true safety labels.
struct ReferenceSet {
  Eigen::MatrixXd points;  // d x m
  std::vector<bool> truly_safe;
  std::size_t true_safe_count = 0;

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
};

/// Dense grid with `per_dim` points per axis, box faces included.
ReferenceSet grid_reference(const Environment& env, std::size_t per_dim);
/// Uniform draws from the domain box.
ReferenceSet monte_carlo_reference(const Environment& env, std::size_t count, std::uint64_t seed);
/// Grid for d <= 2, Monte Carlo otherwise.
ReferenceSet default_reference(const Environment& env, std::size_t grid_per_dim,
                               std::size_t monte_carlo, std::uint64_t seed);

struct Coverage {
  /// Percent of reference points classified safe.
  double safe_pct = 0.0;
  /// Percent of truly safe reference points classified safe.
  double true_safe_pct = 0.0;
};

Coverage coverage(const GpState& gp, const SafetyModel& safety, std::size_t n,
                  const ReferenceSet& reference);
/// From a posterior already evaluated at reference.points.
Coverage coverage(const BatchPosterior& posterior, const SafetyModel& safety, std::size_t n,
                  const ReferenceSet& reference);

/// Largest f over truly safe points: reference points and landmarks, then a
/// pattern search from the best few that never leaves {f >= 0}.
double true_safe_optimum(const Environment& env, const ReferenceSet& reference);

struct RegretSettings {
  std::size_t jitter_draws = 256;
  std::uint64_t seed = 0;
};

/// f* minus f at the maximizer of mu + beta*sigma over the current safe set.
/// Candidates are the seed, the data, safe reference points and Gaussian
/// perturbations of the data.
double regret_probe(const GpState& gp, const SafetyModel& safety, std::size_t n,
                    const Environment& env, double f_star, const ReferenceSet& reference,
                    const RegretSettings& settings = {});

}  // namespace safex
