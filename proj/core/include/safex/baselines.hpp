#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "safex/gp.hpp"
#include "safex/lattice.hpp"
#include "safex/safety.hpp"

namespace safex {

enum class BaselineKind { stageopt, heuristic, uncertainty };

std::string to_string(BaselineKind kind);

struct LipschitzConfig {
  double L = 1.0;
};

/// Posterior and safe set on a grid, computed once per iteration and shared
/// by the expander rules.
struct GridState {
  BatchPosterior posterior;
  std::vector<bool> safe;
  double beta = 0.0;

  double ucb(std::size_t i) const;
  double lcb(std::size_t i) const;
};

GridState grid_state(const GpState& gp, const SafetyModel& safety, std::size_t n,
                     const GridDomain& grid);
/// From a posterior already evaluated at grid.points().
GridState grid_state(BatchPosterior posterior, const SafetyModel& safety, std::size_t n,
                     const GridDomain& grid);

/// Safety model whose seed is moved to the nearest grid point.
SafetyModel snap_seed(const SafetyModel& safety, const GridDomain& grid);

/// Safe grid points x with ucb(x) - L d(x, x') >= threshold for some unsafe
/// grid point x', where d is the kernel metric. Indices in increasing order.
std::vector<std::size_t> stageopt_expanders(const GpState& gp, const SafetyModel& safety,
                                            const GridDomain& grid, const GridState& state,
                                            const LipschitzConfig& cfg);
std::vector<std::size_t> stageopt_expanders(const GpState& gp, const SafetyModel& safety,
                                            std::size_t n, const GridDomain& grid,
                                            const LipschitzConfig& cfg);

/// Safe grid points x such that observing y = ucb(x) at x (with the noise
/// model's variance) would make some currently unsafe grid point safe.
std::vector<std::size_t> heuristic_expanders(const GpState& gp, const SafetyModel& safety,
                                             const GridDomain& grid, const GridState& state);
std::vector<std::size_t> heuristic_expanders(const GpState& gp, const SafetyModel& safety,
                                             std::size_t n, const GridDomain& grid);

struct BaselineChoice {
  std::size_t index = 0;
  Point x;
  /// Posterior standard deviation at x.
  double score = 0.0;
  std::size_t candidates = 0;
  /// The expander set was empty and the safe set was used instead.
  bool fallback = false;
};

/// argmax sigma_n over the kind's candidate set; lowest grid index on ties.
BaselineChoice select_next_baseline(BaselineKind kind, const GpState& gp,
                                    const SafetyModel& safety, std::size_t n,
                                    const GridDomain& grid, const LipschitzConfig& cfg = {});
BaselineChoice select_next_baseline(BaselineKind kind, const GpState& gp,
                                    const SafetyModel& safety, const GridDomain& grid,
                                    const GridState& state, const LipschitzConfig& cfg = {});

}  // namespace safex
