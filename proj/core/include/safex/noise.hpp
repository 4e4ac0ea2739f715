#pragma once

#include <cstddef>

#include "safex/types.hpp"

namespace safex {

/// Observation noise variance sigma_nu^2(x).
///
/// The heteroskedastic model splits the domain by the half-space
/// x[axis] >= offset, with one variance on each side.
class NoiseModel {
 public:
  enum class Kind { homoskedastic, heteroskedastic };

  static NoiseModel homoskedastic(double variance);
  static NoiseModel half_space(std::size_t axis, double offset, double variance_at_or_above,
                               double variance_below);

  Kind kind() const { return kind_; }
  bool is_homoskedastic() const { return kind_ == Kind::homoskedastic; }
  double variance_at(const Point& x) const;
  double min_variance() const;
  double max_variance() const;

  std::size_t axis() const { return axis_; }
  double offset() const { return offset_; }
  double upper_variance() const { return above_; }
  double lower_variance() const { return below_; }

 private:
  NoiseModel(Kind kind, std::size_t axis, double offset, double above, double below);

  Kind kind_;
  std::size_t axis_;
  double offset_;
  double above_;
  double below_;
};

}  // namespace safex
