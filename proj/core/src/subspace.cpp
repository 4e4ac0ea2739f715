#include "safex/subspace.hpp"

#include "safex/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace safex {

JointSearchSpace LineRestriction::search_space() const {
  const Point origin = at(t_min);
  const Eigen::MatrixXd map = (t_max - t_min) * direction;
  return JointSearchSpace::affine(origin, map, origin, map);
}

GridDomain LineRestriction::lattice(std::size_t points) const {
  if (points < 2) throw std::invalid_argument("LineRestriction: lattice needs 2 points");
  const double h = (t_max - t_min) / static_cast<double>(points - 1);
  if (!(h > 0.0)) return GridDomain(anchor, Eigen::MatrixXd::Zero(anchor.size(), 1), {1});
  const double first = std::ceil(t_min / h - 1e-9);
  const double last = std::floor(t_max / h + 1e-9);
  const auto count = static_cast<std::size_t>(last - first) + 1;
  return GridDomain(at(first * h), h * direction, {count});
}

std::vector<LineRestriction> sample_lines(const Point& anchor, std::size_t count,
                                          const Box& domain, std::uint64_t seed) {
  if (!domain.contains(anchor, 1e-12)) {
    throw std::invalid_argument("sample_lines: anchor outside the domain");
  }
  const auto d = anchor.size();
  std::vector<LineRestriction> lines;
  lines.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Point dir(d);
    double norm = 0.0;
    while (!(norm > 1e-12)) {
      for (Eigen::Index k = 0; k < d; ++k) dir[k] = normal(rng);
      norm = dir.norm();
    }
    dir /= norm;

    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d; ++k) {
      if (dir[k] == 0.0) continue;
      double a = (domain.lower()[k] - anchor[k]) / dir[k];
      double b = (domain.upper()[k] - anchor[k]) / dir[k];
      if (a > b) std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    }
    lines.push_back({anchor, dir, std::min(lo, 0.0), std::max(hi, 0.0)});
  }
  return lines;
}

Point line_anchor(const GpState& gp, const SafetyModel& safety, std::size_t n) {
  const auto& pts = gp.data().points;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    if (is_safe(gp, safety, n, *it)) return *it;
  }
  return safety.seed();
}

LineChoice select_next_on_lines(const LineMethod& method, const GpState& gp,
                                const SafetyModel& safety, std::size_t n,
                                const std::vector<LineRestriction>& lines) {
  if (lines.empty()) throw std::invalid_argument("select_next_on_lines: no lines");
  LineChoice best;
  bool found = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const LineRestriction& line = lines[li];
    if (method.kind == LineMethod::Kind::ise) {
      if (!(line.t_max > line.t_min)) continue;
      OptimizerSettings opt = method.optimizer;
      opt.seed = method.optimizer.seed ^ (0x9e3779b97f4a7c15ULL * (li + 1));
      AcquisitionChoice c = select_next(gp, safety, n, line.search_space(), opt);
      if (c.diagnostics.degenerate_search) continue;
      if (!found || c.value > best.choice.value) {
        best.choice = std::move(c);
        best.line = li;
        found = true;
      }
    } else {
      const GridDomain grid = line.lattice(method.lattice_points);
      const GridState state = grid_state(gp, safety, n, grid);
      if (std::none_of(state.safe.begin(), state.safe.end(), [](bool b) { return b; })) continue;
      const BaselineChoice b =
          select_next_baseline(method.baseline, gp, safety, grid, state, method.lipschitz);
      if (!found || b.score > best.choice.value) {
        best.choice = AcquisitionChoice{};
        best.choice.x = b.x;
        best.choice.z = b.x;
        best.choice.value = b.score;
        best.choice.restarts_used = b.candidates;
        best.expander_fallback = b.fallback;
        best.line = li;
        found = true;
      }
    }
  }
  if (found) return best;

  const Point& anchor = lines.front().anchor;
  if (!is_safe(gp, safety, n, anchor)) {
    throw NumericalError("select_next_on_lines: no safe point on any line");
  }
  best = LineChoice{};
  best.choice.x = anchor;
  best.choice.z = anchor;
  best.choice.value = method.kind == LineMethod::Kind::ise ? mutual_info(gp, anchor, anchor)
                                                           : gp.posterior(anchor).stddev();
  best.choice.diagnostics = diagnose(gp, anchor, anchor);
  best.choice.diagnostics.degenerate_search = true;
  best.fallback = true;
  return best;
}

}  // namespace safex
