#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "safex/gp.hpp"
#include "safex/safety.hpp"
#include "safex/types.hpp"

namespace safex {

/// Affine parametrization of the joint (x, z) search: x = ox + Ax ux and
/// z = oz + Az uz with ux, uz in unit cubes. The full box and a line segment
/// are the two cases the library uses.
class JointSearchSpace {
 public:
  static JointSearchSpace full(const Box& box);
  static JointSearchSpace affine(Point x_origin, Eigen::MatrixXd x_map, Point z_origin,
                                 Eigen::MatrixXd z_map);

  std::size_t dim() const { return static_cast<std::size_t>(x_origin_.size()); }
  std::size_t x_params() const { return static_cast<std::size_t>(x_map_.cols()); }
  std::size_t z_params() const { return static_cast<std::size_t>(z_map_.cols()); }
  std::size_t params() const { return x_params() + z_params(); }

  Point x_at(const Eigen::Ref<const Eigen::VectorXd>& ux) const;
  Point z_at(const Eigen::Ref<const Eigen::VectorXd>& uz) const;
  Point x_of(const Eigen::VectorXd& u) const { return x_at(u.head(x_map_.cols())); }
  Point z_of(const Eigen::VectorXd& u) const { return z_at(u.tail(z_map_.cols())); }

  /// Parameters of a point lying on the x (resp. z) image, if it does.
  std::optional<Eigen::VectorXd> x_params_of(const Point& x) const;
  std::optional<Eigen::VectorXd> z_params_of(const Point& z) const;

  const Eigen::MatrixXd& x_map() const { return x_map_; }
  const Eigen::MatrixXd& z_map() const { return z_map_; }

 private:
  JointSearchSpace() = default;

  Point x_origin_;
  Eigen::MatrixXd x_map_;
  Eigen::MatrixXd x_pinv_;
  Point z_origin_;
  Eigen::MatrixXd z_map_;
  Eigen::MatrixXd z_pinv_;
};

struct OptimizerSettings {
  std::size_t restarts = 20;
  std::size_t rejection_draws = 500;
  std::size_t uniform_z_candidates = 16;
  std::size_t max_iterations = 60;
  std::size_t max_halvings = 20;
  double armijo = 1e-4;
  bool analytic_gradient = true;
  /// Central-difference step in unit coordinates for the fallback gradient.
  double fd_step = 1e-6;
  std::uint64_t seed = 0;
};

struct AcquisitionDiagnostics {
  double mi_upper_bound = 0.0;
  double entropy_z = 0.0;
  double rho = 0.0;
  double rho_nu = 0.0;
  bool degenerate_search = false;
  std::size_t candidates_screened = 0;
};

struct AcquisitionChoice {
  Point x;
  Point z;
  double value = 0.0;
  std::size_t restarts_used = 0;
  AcquisitionDiagnostics diagnostics;
};

/// Mutual information at u = (ux, uz) and its gradient with respect to u.
struct MiGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

MiGradient mi_gradient(const GpState& gp, const JointSearchSpace& space,
                       const Eigen::VectorXd& u, bool analytic = true, double fd_step = 1e-6);

AcquisitionDiagnostics diagnose(const GpState& gp, const Point& x, const Point& z);

/// argmax over safe x and any z of the approximate mutual information.
AcquisitionChoice select_next(const GpState& gp, const SafetyModel& safety, std::size_t n,
                              const Box& domain, const OptimizerSettings& settings);
AcquisitionChoice select_next(const GpState& gp, const SafetyModel& safety, std::size_t n,
                              const JointSearchSpace& space, const OptimizerSettings& settings);

}  // namespace safex
