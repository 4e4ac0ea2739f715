#include "safex/types.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace safex {

Box::Box(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size() || lower_.size() == 0) {
    throw std::invalid_argument("Box: bounds must be non-empty and of equal dimension");
  }
  if ((upper_.array() < lower_.array()).any()) {
    throw std::invalid_argument("Box: upper bound below lower bound");
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  const auto d = static_cast<Eigen::Index>(dim);
  return Box(Point::Constant(d, lo), Point::Constant(d, hi));
}

bool Box::contains(const Point& x, double tol) const {
  if (x.size() != lower_.size()) return false;
  return ((x.array() >= lower_.array() - tol) && (x.array() <= upper_.array() + tol)).all();
}

Point Box::clamp(const Point& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

Point Box::from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return lower_ + u.cwiseProduct(upper_ - lower_);
}

Eigen::VectorXd Box::to_unit(const Point& x) const {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double w = upper_[i] - lower_[i];
    u[i] = w > 0.0 ? (x[i] - lower_[i]) / w : 0.0;
  }
  return u;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_point(const Point& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) out += ';';
    out += format_double(x[i]);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace safex
