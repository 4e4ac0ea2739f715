#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace safex {

/// A parameter in R^d.
using Point = Eigen::VectorXd;

/// Raised when a factorization or closed-form evaluation cannot be carried out
/// (non-PSD Gram matrix after jitter, degenerate statistics, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed experiment configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by an environment when an evaluation cannot be produced.
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box [lower, upper] in R^d.
class Box {
 public:
  Box() = default;
  Box(Point lower, Point upper);

  /// The cube [lo, hi]^dim.
  static Box cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  Point width() const { return upper_ - lower_; }

  bool contains(const Point& x, double tol = 0.0) const;
  Point clamp(const Point& x) const;

  /// Maps u in [0,1]^d onto the box.
  Point from_unit(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  Eigen::VectorXd to_unit(const Point& x) const;

 private:
  Point lower_;
  Point upper_;
};

/// Deterministic seed derivation (splitmix64 mixing of `base` and `tag`).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag);

/// Shortest representation that round-trips through strtod.
std::string format_double(double v);

/// Semicolon-joined coordinates, each formatted with format_double.
std::string format_point(const Point& x);

}  // namespace safex
