#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "safex/acquisition.hpp"
#include "safex/baselines.hpp"
#include "safex/gp.hpp"
#include "safex/safety.hpp"

namespace safex {

/// The segment {anchor + t direction : t in [t_min, t_max]} of a line through
/// the anchor, clipped to a box.
struct LineRestriction {
  Point anchor;
  Point direction;
  double t_min = 0.0;
  double t_max = 0.0;

  Point at(double t) const { return anchor + t * direction; }
  /// Joint search over x and z both restricted to the segment.
  JointSearchSpace search_space() const;
  /// Regular lattice on the segment with spacing (t_max - t_min) / (points - 1),
  /// aligned so that the anchor is a lattice point.
  GridDomain lattice(std::size_t points) const;
};

/// `count` lines through `anchor` with directions uniform on the sphere.
/// Line i depends only on (seed, i), so a larger count extends a smaller one.
std::vector<LineRestriction> sample_lines(const Point& anchor, std::size_t count,
                                          const Box& domain, std::uint64_t seed);

/// Most recently evaluated point that is currently safe, else the seed.
Point line_anchor(const GpState& gp, const SafetyModel& safety, std::size_t n);

struct LineMethod {
  enum class Kind { ise, baseline };
  Kind kind = Kind::ise;
  BaselineKind baseline = BaselineKind::stageopt;
  LipschitzConfig lipschitz;
  OptimizerSettings optimizer;
  std::size_t lattice_points = 201;
};

struct LineChoice {
  AcquisitionChoice choice;
  std::size_t line = 0;
  /// No safe candidate on any line; the anchor was returned.
  bool fallback = false;
  /// For baselines: the expander set was empty on the chosen line.
  bool expander_fallback = false;
};

/// Best selection across lines, ties to the lowest line index. For ISE the
/// value is the mutual information, for baselines the posterior standard
/// deviation at the chosen point.
LineChoice select_next_on_lines(const LineMethod& method, const GpState& gp,
                                const SafetyModel& safety, std::size_t n,
                                const std::vector<LineRestriction>& lines);

}  // namespace safex
