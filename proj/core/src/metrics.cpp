#include "safex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "safex/lattice.hpp"

namespace safex {

namespace {

void label(const Environment& env, ReferenceSet& ref) {
  const Eigen::VectorXd f = env.constraint(ref.points);
  ref.truly_safe.assign(ref.size(), false);
  ref.true_safe_count = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double v = f[static_cast<Eigen::Index>(i)];
    if (std::isfinite(v) && v >= 0.0) {
      ref.truly_safe[i] = true;
      ++ref.true_safe_count;
    }
  }
}

double safe_value(const Environment& env, const Point& x) {
  const double v = env.constraint(x);
  return std::isfinite(v) && v >= 0.0 ? v : -std::numeric_limits<double>::infinity();
}

}  // namespace

ReferenceSet grid_reference(const Environment& env, std::size_t per_dim) {
  if (per_dim < 2) throw std::invalid_argument("grid_reference: need at least 2 points per axis");
  const GridDomain grid = GridDomain::box(env.domain(), per_dim);
  ReferenceSet ref;
  ref.points = grid.points();
  label(env, ref);
  return ref;
}

ReferenceSet monte_carlo_reference(const Environment& env, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("monte_carlo_reference: empty sample");
  const Box& box = env.domain();
  const auto d = static_cast<Eigen::Index>(box.dim());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ReferenceSet ref;
  ref.points.resize(d, static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < ref.points.cols(); ++j) {
    Point unit(d);
    for (Eigen::Index i = 0; i < d; ++i) unit[i] = u(rng);
    ref.points.col(j) = box.from_unit(unit);
  }
  label(env, ref);
  return ref;
}

ReferenceSet default_reference(const Environment& env, std::size_t grid_per_dim,
                               std::size_t monte_carlo, std::uint64_t seed) {
  if (env.domain().dim() <= 2) return grid_reference(env, grid_per_dim);
  return monte_carlo_reference(env, monte_carlo, seed);
}

Coverage coverage(const GpState& gp, const SafetyModel& safety, std::size_t n,
                  const ReferenceSet& reference) {
  if (reference.size() == 0) return {};
  return coverage(gp.marginals(reference.points), safety, n, reference);
}

Coverage coverage(const BatchPosterior& post, const SafetyModel& safety, std::size_t n,
                  const ReferenceSet& reference) {
  Coverage c;
  if (reference.size() == 0) return c;
  const std::vector<bool> mask = safe_mask(post, safety, n, reference.points);
  std::size_t safe = 0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++safe;
    if (reference.truly_safe[i]) ++hit;
  }
  c.safe_pct = 100.0 * static_cast<double>(safe) / static_cast<double>(reference.size());
  if (reference.true_safe_count > 0) {
    c.true_safe_pct =
        100.0 * static_cast<double>(hit) / static_cast<double>(reference.true_safe_count);
  }
  return c;
}

double true_safe_optimum(const Environment& env, const ReferenceSet& reference) {
  const Box& box = env.domain();
  std::vector<Point> starts = env.landmarks();
  starts.push_back(env.seed());
  if (reference.size() > 0) {
    const Eigen::VectorXd f = env.constraint(reference.points);
    std::vector<std::size_t> order(reference.size());
    std::iota(order.begin(), order.end(), 0);
    const std::size_t keep = std::min<std::size_t>(8, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double fa = std::isfinite(f[static_cast<Eigen::Index>(a)])
                                              ? f[static_cast<Eigen::Index>(a)]
                                              : -std::numeric_limits<double>::infinity();
                        const double fb = std::isfinite(f[static_cast<Eigen::Index>(b)])
                                              ? f[static_cast<Eigen::Index>(b)]
                                              : -std::numeric_limits<double>::infinity();
                        return fa > fb || (fa == fb && a < b);
                      });
    for (std::size_t k = 0; k < keep; ++k) {
      if (reference.truly_safe[order[k]]) {
        starts.push_back(reference.points.col(static_cast<Eigen::Index>(order[k])));
      }
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd width = box.width();
  for (Point x : starts) {
    x = box.clamp(x);
    double fx = safe_value(env, x);
    if (!std::isfinite(fx)) continue;
    double step = 0.05;
    while (step > 1e-9) {
      bool moved = false;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (const double sign : {1.0, -1.0}) {
          Point y = x;
          y[i] += sign * step * width[i];
          y = box.clamp(y);
          const double fy = safe_value(env, y);
          if (fy > fx) {
            x = y;
            fx = fy;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    best = std::max(best, fx);
  }
  return best;
}

double regret_probe(const GpState& gp, const SafetyModel& safety, std::size_t n,
                    const Environment& env, double f_star, const ReferenceSet& reference,
                    const RegretSettings& settings) {
  const Box& box = env.domain();
  const auto d = static_cast<Eigen::Index>(box.dim());
  std::vector<Point> pool;
  pool.push_back(safety.seed());
  for (const Point& p : gp.data().points) pool.push_back(p);
  if (!gp.data().points.empty()) {
    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, gp.data().points.size() - 1);
    const Eigen::VectorXd scale = gp.kernel().lengthscales() * 0.25;
    for (std::size_t k = 0; k < settings.jitter_draws; ++k) {
      Point y = gp.data().points[pick(rng)];
      for (Eigen::Index i = 0; i < d; ++i) y[i] += scale[i] * normal(rng);
      pool.push_back(box.clamp(y));
    }
  }
  Eigen::MatrixXd candidates(d, static_cast<Eigen::Index>(pool.size()) + reference.points.cols());
  for (std::size_t j = 0; j < pool.size(); ++j) candidates.col(static_cast<Eigen::Index>(j)) = pool[j];
  candidates.rightCols(reference.points.cols()) = reference.points;

  const BatchPosterior post = gp.marginals(candidates);
  const std::vector<bool> mask = safe_mask(post, safety, n, candidates);
  const double beta = safety.beta(n);
  Eigen::Index arg = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
    if (!mask[static_cast<std::size_t>(j)]) continue;
    const double ucb = post.mean[j] + beta * std::sqrt(std::max(0.0, post.variance[j]));
    if (ucb > best) {
      best = ucb;
      arg = j;
    }
  }
  const Point x = arg >= 0 ? Point(candidates.col(arg)) : safety.seed();
  return f_star - env.constraint(x);
}

}  // namespace safex
