#include "safex/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace safex {

namespace {

// Unsafe points beyond this kernel-scaled distance cannot be reached by a
// single hypothetical observation (their prior covariance is below 1e-10).
constexpr double kHeuristicRadius = 7.0;

double sd(const BatchPosterior& p, std::size_t i) {
  return std::sqrt(std::max(0.0, p.variance[static_cast<Eigen::Index>(i)]));
}

// Lattice offsets within the scaled radius, sorted by scaled distance.
struct Offset {
  std::vector<long> delta;
  double r2;
};

std::vector<Offset> neighbourhood(const GridDomain& grid, const Eigen::VectorXd& w,
                                  double radius) {
  const std::size_t axes = grid.axes();
  std::vector<long> reach(axes);
  for (std::size_t k = 0; k < axes; ++k) {
    const double wk = w[static_cast<Eigen::Index>(k)];
    const long cap = static_cast<long>(grid.counts()[k]) - 1;
    reach[k] = wk > 0.0 ? std::min(cap, static_cast<long>(std::floor(radius / wk))) : cap;
  }
  std::vector<Offset> out;
  std::vector<long> cur(axes);
  for (std::size_t k = 0; k < axes; ++k) cur[k] = -reach[k];
  while (true) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < axes; ++k) {
      const double s = w[static_cast<Eigen::Index>(k)] * static_cast<double>(cur[k]);
      r2 += s * s;
    }
    if (r2 <= radius * radius) out.push_back({cur, r2});
    std::size_t k = 0;
    for (; k < axes; ++k) {
      if (++cur[k] <= reach[k]) break;
      cur[k] = -reach[k];
    }
    if (k == axes) break;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Offset& a, const Offset& b) { return a.r2 < b.r2; });
  return out;
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::stageopt:
      return "stageopt";
    case BaselineKind::heuristic:
      return "heuristic";
    case BaselineKind::uncertainty:
      return "uncertainty";
  }
  return "unknown";
}

double GridState::ucb(std::size_t i) const {
  return posterior.mean[static_cast<Eigen::Index>(i)] + beta * sd(posterior, i);
}

double GridState::lcb(std::size_t i) const {
  return posterior.mean[static_cast<Eigen::Index>(i)] - beta * sd(posterior, i);
}

GridState grid_state(const GpState& gp, const SafetyModel& safety, std::size_t n,
                     const GridDomain& grid) {
  return grid_state(gp.marginals(grid.points()), safety, n, grid);
}

GridState grid_state(BatchPosterior posterior, const SafetyModel& safety, std::size_t n,
                     const GridDomain& grid) {
  GridState s;
  s.posterior = std::move(posterior);
  s.safe = safe_mask(s.posterior, safety, n, grid.points());
  s.beta = safety.beta(n);
  return s;
}

SafetyModel snap_seed(const SafetyModel& safety, const GridDomain& grid) {
  return safety.with_seed(grid.point(grid.nearest_index(safety.seed())));
}

std::vector<std::size_t> stageopt_expanders(const GpState& gp, const SafetyModel& safety,
                                            const GridDomain& grid, const GridState& state,
                                            const LipschitzConfig& cfg) {
  std::vector<bool> unsafe(grid.size());
  bool any_unsafe = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    unsafe[i] = !state.safe[i];
    any_unsafe = any_unsafe || unsafe[i];
  }
  std::vector<std::size_t> out;
  if (!any_unsafe) return out;
  const std::vector<double> r2 =
      squared_distance_transform(grid, unsafe, grid.scaled_steps(gp.kernel()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!state.safe[i]) continue;
    const double d = gp.kernel().metric_from_scaled_distance(std::sqrt(r2[i]));
    if (state.ucb(i) - cfg.L * d >= safety.threshold()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> stageopt_expanders(const GpState& gp, const SafetyModel& safety,
                                            std::size_t n, const GridDomain& grid,
                                            const LipschitzConfig& cfg) {
  return stageopt_expanders(gp, safety, grid, grid_state(gp, safety, n, grid), cfg);
}

std::vector<std::size_t> heuristic_expanders(const GpState& gp, const SafetyModel& safety,
                                             const GridDomain& grid, const GridState& state) {
  std::vector<std::size_t> out;
  const auto& post = state.posterior;
  const double beta = state.beta;
  const double floor = kDegenerateVarianceFraction * gp.kernel().outputscale();
  const std::vector<Offset> offsets =
      neighbourhood(grid, grid.scaled_steps(gp.kernel()), kHeuristicRadius);
  const auto& counts = grid.counts();
  const bool has_data = gp.size() > 0;

  // Projections L^{-1} k(X, g) for safe points and the unsafe points within
  // reach of one, which is all the scan touches.
  std::vector<Eigen::Index> column(grid.size(), -1);
  Eigen::MatrixXd projected;
  if (has_data) {
    const std::vector<double> reach =
        squared_distance_transform(grid, state.safe, grid.scaled_steps(gp.kernel()));
    std::vector<std::size_t> needed;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (state.safe[i] || reach[i] <= kHeuristicRadius * kHeuristicRadius * (1.0 + 1e-9)) {
        column[i] = static_cast<Eigen::Index>(needed.size());
        needed.push_back(i);
      }
    }
    Eigen::MatrixXd sub(grid.dim(), static_cast<Eigen::Index>(needed.size()));
    for (std::size_t k = 0; k < needed.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = grid.points().col(static_cast<Eigen::Index>(needed[k]));
    }
    projected = gp.posterior(sub).projected;
  }

  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!state.safe[i]) continue;
    const double vx = post.variance[static_cast<Eigen::Index>(i)];
    if (vx <= floor) continue;
    const Point xi = grid.point(i);
    const double nv = gp.noise_variance(xi);
    // Observing y = ucb(x) moves the mean at g by cov(x, g) beta sigma(x) / (vx + nv).
    const double gain = beta * std::sqrt(vx) / (vx + nv);
    const auto base = grid.multi_index(i);
    bool expander = false;
    std::vector<std::size_t> m(base.size());
    for (const auto& off : offsets) {
      bool inside = true;
      for (std::size_t k = 0; k < base.size(); ++k) {
        const long c = static_cast<long>(base[k]) + off.delta[k];
        if (c < 0 || c >= static_cast<long>(counts[k])) {
          inside = false;
          break;
        }
        m[k] = static_cast<std::size_t>(c);
      }
      if (!inside) continue;
      const std::size_t g = grid.flat_index(m);
      if (state.safe[g]) continue;
      const auto gi = static_cast<Eigen::Index>(g);
      double cov = gp.kernel()(xi, grid.point(g));
      if (has_data) {
        cov -= projected.col(column[i]).dot(projected.col(column[g]));
      }
      const double mean = post.mean[gi] + cov * gain;
      const double var = std::max(0.0, post.variance[gi] - cov * cov / (vx + nv));
      if (mean - beta * std::sqrt(var) >= safety.threshold()) {
        expander = true;
        break;
      }
    }
    if (expander) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> heuristic_expanders(const GpState& gp, const SafetyModel& safety,
                                             std::size_t n, const GridDomain& grid) {
  return heuristic_expanders(gp, safety, grid, grid_state(gp, safety, n, grid));
}

BaselineChoice select_next_baseline(BaselineKind kind, const GpState& gp,
                                    const SafetyModel& safety, std::size_t n,
                                    const GridDomain& grid, const LipschitzConfig& cfg) {
  return select_next_baseline(kind, gp, safety, grid, grid_state(gp, safety, n, grid), cfg);
}

BaselineChoice select_next_baseline(BaselineKind kind, const GpState& gp,
                                    const SafetyModel& safety, const GridDomain& grid,
                                    const GridState& state, const LipschitzConfig& cfg) {
  std::vector<std::size_t> safe;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (state.safe[i]) safe.push_back(i);
  }
  if (safe.empty()) throw NumericalError("select_next_baseline: no safe grid point");

  BaselineChoice choice;
  std::vector<std::size_t> candidates;
  switch (kind) {
    case BaselineKind::stageopt:
      candidates = stageopt_expanders(gp, safety, grid, state, cfg);
      break;
    case BaselineKind::heuristic:
      candidates = heuristic_expanders(gp, safety, grid, state);
      break;
    case BaselineKind::uncertainty:
      candidates = safe;
      break;
  }
  if (candidates.empty()) {
    candidates = std::move(safe);
    choice.fallback = kind != BaselineKind::uncertainty;
  }
  choice.candidates = candidates.size();
  double best = -1.0;
  for (std::size_t i : candidates) {
    const double s = sd(state.posterior, i);
    if (s > best) {
      best = s;
      choice.index = i;
    }
  }
  choice.x = grid.point(choice.index);
  choice.score = best;
  return choice;
}

}  // namespace safex
