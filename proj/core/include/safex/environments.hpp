#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "safex/dynamics.hpp"
#include "safex/kernel.hpp"
#include "safex/lattice.hpp"
#include "safex/noise.hpp"
#include "safex/types.hpp"

namespace safex {

/// A constraint oracle. `observe` is the only channel an explorer may use;
/// `constraint` returns the noiseless truth and is reserved for metrics.
class Environment {
 public:
  Environment(std::string name, Box domain, Point seed, NoiseModel noise,
              std::uint64_t noise_seed);
  virtual ~Environment() = default;

  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  const Point& seed() const { return seed_; }
  const NoiseModel& noise() const { return noise_; }

  /// f(x) plus Gaussian noise with the declared variance. Throws
  /// EnvironmentError when f(x) is not finite.
  double observe(const Point& x);
  /// Same, drawing the noise from a caller-owned stream.
  double observe(const Point& x, std::mt19937_64& rng) const;

  /// True f(x); non-finite values count as unsafe.
  virtual double constraint(const Point& x) const = 0;
  /// f at every column of `points`.
  virtual Eigen::VectorXd constraint(const Eigen::MatrixXd& points) const;
  /// Points where f is known to be large, used to locate the safe optimum.
  virtual std::vector<Point> landmarks() const;

 private:
  std::string name_;
  Box domain_;
  Point seed_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
};

/// Noiseless GP interpolant of one prior draw on a lattice, redrawn until
/// f(seed) > 0.
class GpSampleEnvironment : public Environment {
 public:
  static constexpr int kMaxRedraws = 100;

  GpSampleEnvironment(const RbfKernel& kernel, const GridDomain& lattice, const Box& domain,
                      Point seed, NoiseModel noise, std::uint64_t sample_seed,
                      std::uint64_t noise_seed);

  double constraint(const Point& x) const override;
  Eigen::VectorXd constraint(const Eigen::MatrixXd& points) const override;
  std::vector<Point> landmarks() const override;

  /// Drawn values at the lattice points.
  const Eigen::VectorXd& sample() const { return sample_; }
  const Eigen::MatrixXd& lattice_points() const { return points_; }
  int redraws() const { return redraws_; }

 private:
  RbfKernel kernel_;
  Eigen::MatrixXd points_;
  Eigen::VectorXd sample_;
  Eigen::VectorXd weights_;
  int redraws_ = 0;
};

/// f(x) = exp(-x) + 0.05 on a 1D box.
class ExponentialEnvironment : public Environment {
 public:
  ExponentialEnvironment(Box domain, Point seed, double noise_variance, std::uint64_t noise_seed);
  double constraint(const Point& x) const override;
  std::vector<Point> landmarks() const override;
};

enum class BumpKind { fived, heteroskedastic };

/// fived: exp(-|x|^2) + 2 exp(-|x - x1|^2) + 5 exp(-|x - x2|^2) - 0.2
/// heteroskedastic: 0.5 exp(-|x|^2) + sum over +/- of exp(-|x +/- x1|^2)
///   + 3 exp(-|x +/- x2|^2), plus 0.2
/// with x1 = (2.7, 0, ...) and x2 = (6, 0, ...).
class BumpEnvironment : public Environment {
 public:
  BumpEnvironment(BumpKind kind, Box domain, Point seed, NoiseModel noise,
                  std::uint64_t noise_seed);
  double constraint(const Point& x) const override;
  std::vector<Point> landmarks() const override;
  BumpKind kind() const { return kind_; }

 private:
  BumpKind kind_;
  Point x1_;
  Point x2_;
};

class PendulumEnvironment : public Environment {
 public:
  PendulumEnvironment(PendulumParams params, Box domain, Point seed, double noise_variance,
                      std::uint64_t noise_seed);
  double constraint(const Point& x) const override;
  const PendulumParams& params() const { return params_; }

 private:
  PendulumParams params_;
};

class CartPoleEnvironment : public Environment {
 public:
  CartPoleEnvironment(CartPoleParams params, Box domain, Point seed, double noise_variance,
                      std::uint64_t noise_seed);
  double constraint(const Point& x) const override;
  const CartPoleParams& params() const { return params_; }

 private:
  CartPoleParams params_;
};

}  // namespace safex
