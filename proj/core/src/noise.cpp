#include "safex/noise.hpp"

#include <algorithm>
#include <stdexcept>

namespace safex {

NoiseModel::NoiseModel(Kind kind, std::size_t axis, double offset, double above, double below)
    : kind_(kind), axis_(axis), offset_(offset), above_(above), below_(below) {
  if (!(above_ > 0.0) || !(below_ > 0.0)) {
    throw std::invalid_argument("NoiseModel: variances must be positive");
  }
}

NoiseModel NoiseModel::homoskedastic(double variance) {
  return NoiseModel(Kind::homoskedastic, 0, 0.0, variance, variance);
}

NoiseModel NoiseModel::half_space(std::size_t axis, double offset, double variance_at_or_above,
                                  double variance_below) {
  return NoiseModel(Kind::heteroskedastic, axis, offset, variance_at_or_above, variance_below);
}

double NoiseModel::variance_at(const Point& x) const {
  if (kind_ == Kind::homoskedastic) return above_;
  if (static_cast<Eigen::Index>(axis_) >= x.size()) {
    throw std::out_of_range("NoiseModel: split axis outside the point dimension");
  }
  return x[static_cast<Eigen::Index>(axis_)] >= offset_ ? above_ : below_;
}

double NoiseModel::min_variance() const { return std::min(above_, below_); }
double NoiseModel::max_variance() const { return std::max(above_, below_); }

}  // namespace safex
