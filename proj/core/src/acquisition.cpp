#include "safex/acquisition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/QR>

#include "safex/entropy.hpp"

namespace safex {

namespace {

constexpr double kOnImageTolerance = 1e-9;

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  return a.completeOrthogonalDecomposition().pseudoInverse();
}

std::optional<Eigen::VectorXd> params_of(const Point& p, const Point& origin,
                                         const Eigen::MatrixXd& map,
                                         const Eigen::MatrixXd& pinv) {
  Eigen::VectorXd u = pinv * (p - origin);
  const double scale = 1.0 + p.lpNorm<Eigen::Infinity>();
  if ((u.array() < -kOnImageTolerance).any() || (u.array() > 1.0 + kOnImageTolerance).any()) {
    return std::nullopt;
  }
  u = u.cwiseMax(0.0).cwiseMin(1.0);
  if ((origin + map * u - p).lpNorm<Eigen::Infinity>() > kOnImageTolerance * scale) {
    return std::nullopt;
  }
  return u;
}

// Length, in lengthscales, of the image of each unit parameter direction.
constexpr double kJitterScales[] = {0.1, 0.3, 0.6};

Eigen::VectorXd scaled_column_lengths(const Eigen::MatrixXd& map, const RbfKernel& k) {
  return (k.lengthscales().cwiseInverse().asDiagonal() * map).colwise().norm().transpose();
}

MiInputs floored(const JointPosterior& j, double noise_var, double outputscale) {
  MiInputs in{j.mean_z, j.var_z, j.var_x, noise_var, j.cov};
  const double floor = kDegenerateVarianceFraction * outputscale;
  if (in.var_z <= floor) in.var_z = 0.0;
  if (in.var_x <= floor) {
    in.var_x = 0.0;
    in.cov = 0.0;
  }
  return in;
}

double mi_at(const GpState& gp, const JointSearchSpace& space, const Eigen::VectorXd& u) {
  return mutual_info(gp, space.x_of(u), space.z_of(u));
}

struct Candidate {
  Eigen::VectorXd u;
  double value = 0.0;
};

class Ascent {
 public:
  Ascent(const GpState& gp, const SafetyModel& safety, std::size_t n,
         const JointSearchSpace& space, const OptimizerSettings& settings)
      : gp_(gp), safety_(safety), n_(n), space_(space), settings_(settings) {
    Eigen::VectorXd lengths(space.params());
    lengths << scaled_column_lengths(space.x_map(), gp.kernel()),
        scaled_column_lengths(space.z_map(), gp.kernel());
    const double longest = std::max(lengths.maxCoeff(), 1e-12);
    initial_step_ = std::min(0.25, 0.5 / longest);
    max_step_ = std::min(0.5, 4.0 * initial_step_);
  }

  Candidate run(Eigen::VectorXd u) const {
    const auto px = static_cast<Eigen::Index>(space_.x_params());
    MiGradient cur = evaluate(u);
    // Joint, z-only and x-only steps, each with its own step size. At the
    // safe-set boundary the joint step shrinks to nothing while z can still
    // move freely.
    std::array<double, 3> step;
    step.fill(initial_step_);
    for (std::size_t it = 0; it < settings_.max_iterations; ++it) {
      Eigen::VectorXd g = cur.gradient;
      for (Eigen::Index k = 0; k < g.size(); ++k) {
        if ((u[k] <= 0.0 && g[k] < 0.0) || (u[k] >= 1.0 && g[k] > 0.0)) g[k] = 0.0;
      }
      int chosen = -1;
      Eigen::VectorXd best_u;
      double best_value = cur.value;
      for (int block = 0; block < 3; ++block) {
        Eigen::VectorXd gb = g;
        if (block == 1) gb.head(px).setZero();
        if (block == 2) gb.tail(gb.size() - px).setZero();
        const double norm = gb.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) continue;
        const Eigen::VectorXd dir = gb / norm;
        double trial = step[block];
        for (std::size_t h = 0; h <= settings_.max_halvings; ++h, trial *= 0.5) {
          Eigen::VectorXd next = (u + trial * dir).cwiseMax(0.0).cwiseMin(1.0);
          const Eigen::VectorXd delta = next - u;
          if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
          const Point x = space_.x_of(next);
          if (block != 1 && !is_safe(gp_, safety_, n_, x)) continue;
          const double v = mutual_info(gp_, x, space_.z_of(next));
          if (v >= cur.value + settings_.armijo * gb.dot(delta) && v > cur.value) {
            step[block] = trial;
            if (v > best_value) {
              best_value = v;
              best_u = std::move(next);
              chosen = block;
            }
            break;
          }
        }
      }
      if (chosen < 0) break;
      const double gain = best_value - cur.value;
      u = std::move(best_u);
      cur = evaluate(u);
      step[static_cast<std::size_t>(chosen)] =
          std::min(2.0 * step[static_cast<std::size_t>(chosen)], max_step_);
      if (gain <= 1e-12 * (1.0 + cur.value)) break;
    }
    const double value = mi_at(gp_, space_, u);
    return {std::move(u), value};
  }

 private:
  MiGradient evaluate(const Eigen::VectorXd& u) const {
    return mi_gradient(gp_, space_, u, settings_.analytic_gradient, settings_.fd_step);
  }

  const GpState& gp_;
  const SafetyModel& safety_;
  std::size_t n_;
  const JointSearchSpace& space_;
  const OptimizerSettings& settings_;
  double initial_step_ = 0.1;
  double max_step_ = 0.5;
};

Eigen::MatrixXd columns_of(const std::vector<Point>& points, std::size_t dim) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = points[i];
  return m;
}

}  // namespace

JointSearchSpace JointSearchSpace::full(const Box& box) {
  const Eigen::MatrixXd map = box.width().asDiagonal();
  return affine(box.lower(), map, box.lower(), map);
}

JointSearchSpace JointSearchSpace::affine(Point x_origin, Eigen::MatrixXd x_map, Point z_origin,
                                          Eigen::MatrixXd z_map) {
  if (x_map.rows() != x_origin.size() || z_map.rows() != z_origin.size() ||
      x_origin.size() != z_origin.size()) {
    throw std::invalid_argument("JointSearchSpace: inconsistent dimensions");
  }
  if (x_map.cols() == 0 || z_map.cols() == 0) {
    throw std::invalid_argument("JointSearchSpace: empty parametrization");
  }
  JointSearchSpace s;
  s.x_pinv_ = pseudo_inverse(x_map);
  s.z_pinv_ = pseudo_inverse(z_map);
  s.x_origin_ = std::move(x_origin);
  s.x_map_ = std::move(x_map);
  s.z_origin_ = std::move(z_origin);
  s.z_map_ = std::move(z_map);
  return s;
}

Point JointSearchSpace::x_at(const Eigen::Ref<const Eigen::VectorXd>& ux) const {
  return x_origin_ + x_map_ * ux;
}

Point JointSearchSpace::z_at(const Eigen::Ref<const Eigen::VectorXd>& uz) const {
  return z_origin_ + z_map_ * uz;
}

std::optional<Eigen::VectorXd> JointSearchSpace::x_params_of(const Point& x) const {
  return params_of(x, x_origin_, x_map_, x_pinv_);
}

std::optional<Eigen::VectorXd> JointSearchSpace::z_params_of(const Point& z) const {
  return params_of(z, z_origin_, z_map_, z_pinv_);
}

MiGradient mi_gradient(const GpState& gp, const JointSearchSpace& space, const Eigen::VectorXd& u,
                       bool analytic, double fd_step) {
  MiGradient out;
  const auto px = static_cast<Eigen::Index>(space.x_params());
  const auto pz = static_cast<Eigen::Index>(space.z_params());
  out.gradient = Eigen::VectorXd::Zero(px + pz);
  const Point x = space.x_of(u);
  const Point z = space.z_of(u);

  if (!analytic) {
    out.value = mutual_info(gp, x, z);
    for (Eigen::Index k = 0; k < px + pz; ++k) {
      Eigen::VectorXd up = u;
      Eigen::VectorXd um = u;
      up[k] = std::min(1.0, u[k] + fd_step);
      um[k] = std::max(0.0, u[k] - fd_step);
      out.gradient[k] = (mi_at(gp, space, up) - mi_at(gp, space, um)) / (up[k] - um[k]);
    }
    return out;
  }

  const JointPosteriorGradient jg = gp.joint_with_gradient(x, z);
  const MiInputs in = floored(jg.value, gp.noise_variance(x), gp.kernel().outputscale());
  const MiSensitivity s = mutual_info_sensitivity(in);
  out.value = s.value;
  const Eigen::VectorXd gx = s.d_var_x * jg.dvar_x_dx + s.d_cov * jg.dcov_dx;
  const Eigen::VectorXd gz =
      s.d_mean_z * jg.dmean_z_dz + s.d_var_z * jg.dvar_z_dz + s.d_cov * jg.dcov_dz;
  out.gradient.head(px) = space.x_map().transpose() * gx;
  out.gradient.tail(pz) = space.z_map().transpose() * gz;
  return out;
}

AcquisitionDiagnostics diagnose(const GpState& gp, const Point& x, const Point& z) {
  AcquisitionDiagnostics d;
  d.mi_upper_bound = mi_upper_bound(gp, x);
  const Posterior pz = gp.posterior(z);
  if (pz.variance > kDegenerateVarianceFraction * gp.kernel().outputscale()) {
    d.entropy_z = entropy_approx({pz.mean, pz.stddev()});
  }
  d.rho = gp.cross_correlation(x, z);
  d.rho_nu = std::sqrt(rho_nu_squared(gp.posterior(x).variance, gp.noise_variance(x)));
  return d;
}

AcquisitionChoice select_next(const GpState& gp, const SafetyModel& safety, std::size_t n,
                              const Box& domain, const OptimizerSettings& settings) {
  return select_next(gp, safety, n, JointSearchSpace::full(domain), settings);
}

AcquisitionChoice select_next(const GpState& gp, const SafetyModel& safety, std::size_t n,
                              const JointSearchSpace& space, const OptimizerSettings& settings) {
  const std::size_t dim = space.dim();
  const auto px = static_cast<Eigen::Index>(space.x_params());
  const auto pz = static_cast<Eigen::Index>(space.z_params());
  std::mt19937_64 rng(settings.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Candidate x parameters: seed, evaluated points, jittered evaluated points,
  // then uniform draws; only safe ones are kept.
  std::vector<Eigen::VectorXd> pool_u;
  if (auto u = space.x_params_of(safety.seed())) pool_u.push_back(*u);
  // Jitter at several fractions of a lengthscale, so that both sides of the
  // safe-set boundary near the data are represented.
  const Eigen::ArrayXd unit_length =
      scaled_column_lengths(space.x_map(), gp.kernel()).array().max(1e-12).inverse();
  std::vector<Eigen::VectorXd> on_image;
  for (const auto& p : gp.data().points) {
    if (auto u = space.x_params_of(p)) on_image.push_back(*u);
  }
  for (const auto& u : on_image) pool_u.push_back(u);
  for (double scale : kJitterScales) {
    for (int rep = 0; rep < 2; ++rep) {
      for (const auto& u : on_image) {
        Eigen::VectorXd v = u;
        for (Eigen::Index k = 0; k < px; ++k) v[k] += scale * unit_length[k] * normal(rng);
        pool_u.push_back(v.cwiseMax(0.0).cwiseMin(1.0));
      }
    }
  }
  for (std::size_t i = 0; i < settings.rejection_draws; ++i) {
    Eigen::VectorXd v(px);
    for (Eigen::Index k = 0; k < px; ++k) v[k] = unif(rng);
    pool_u.push_back(std::move(v));
  }

  std::vector<Point> pool_x;
  pool_x.reserve(pool_u.size());
  for (const auto& u : pool_u) pool_x.push_back(space.x_at(u));
  const std::vector<bool> safe = safe_mask(gp, safety, n, columns_of(pool_x, dim));
  std::vector<Eigen::VectorXd> safe_u;
  std::vector<Point> safe_x;
  for (std::size_t i = 0; i < pool_u.size(); ++i) {
    if (!safe[i]) continue;
    safe_u.push_back(pool_u[i]);
    safe_x.push_back(pool_x[i]);
  }

  // Candidate z parameters: every pool point that lies on the z image plus
  // uniform draws.
  std::vector<Eigen::VectorXd> zc_u;
  for (const auto& x : pool_x) {
    if (auto u = space.z_params_of(x)) zc_u.push_back(*u);
  }
  for (std::size_t i = 0; i < settings.uniform_z_candidates; ++i) {
    Eigen::VectorXd v(pz);
    for (Eigen::Index k = 0; k < pz; ++k) v[k] = unif(rng);
    zc_u.push_back(std::move(v));
  }
  std::vector<Point> zc;
  zc.reserve(zc_u.size());
  for (const auto& u : zc_u) zc.push_back(space.z_at(u));

  AcquisitionChoice choice;
  if (safe_u.empty()) {
    // Degenerate: the seed is not on the search image. Score it against the
    // z candidates and report the search as degenerate.
    choice.x = safety.seed();
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t j = 0; j < zc.size(); ++j) {
      const double v = mutual_info(gp, choice.x, zc[j]);
      if (v > best_value) {
        best_value = v;
        best = j;
      }
    }
    choice.z = zc.empty() ? choice.x : zc[best];
    choice.value = mutual_info(gp, choice.x, choice.z);
    choice.diagnostics = diagnose(gp, choice.x, choice.z);
    choice.diagnostics.degenerate_search = true;
    return choice;
  }

  // Screen all (x, z) candidate pairs from two batch posteriors.
  const Eigen::MatrixXd xs = columns_of(safe_x, dim);
  const Eigen::MatrixXd zs = columns_of(zc, dim);
  const BatchPosterior bx = gp.posterior(xs);
  const BatchPosterior bz = gp.posterior(zs);
  Eigen::MatrixXd cov = gp.kernel().cross(xs, zs);
  if (gp.size() > 0) cov.noalias() -= bx.projected.transpose() * bz.projected;
  const double outputscale = gp.kernel().outputscale();

  struct Screened {
    std::size_t xi;
    std::size_t zj;
    double value;
  };
  std::vector<Screened> screened;
  screened.reserve(safe_x.size());
  for (std::size_t i = 0; i < safe_x.size(); ++i) {
    const double nv = gp.noise_variance(safe_x[i]);
    Screened best{i, 0, -1.0};
    for (std::size_t j = 0; j < zc.size(); ++j) {
      JointPosterior jp;
      jp.var_x = bx.variance[static_cast<Eigen::Index>(i)];
      jp.mean_z = bz.mean[static_cast<Eigen::Index>(j)];
      jp.var_z = bz.variance[static_cast<Eigen::Index>(j)];
      jp.cov = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const double v = mutual_info_rewritten(floored(jp, nv, outputscale));
      if (v > best.value) best = {i, j, v};
    }
    screened.push_back(best);
  }
  choice.diagnostics.candidates_screened = safe_x.size() * zc.size();
  std::stable_sort(screened.begin(), screened.end(),
                   [](const Screened& a, const Screened& b) { return a.value > b.value; });

  std::vector<Eigen::VectorXd> starts;
  for (const auto& s : screened) {
    if (starts.size() >= settings.restarts) break;
    Eigen::VectorXd u(px + pz);
    u << safe_u[s.xi], zc_u[s.zj];
    const bool duplicate = std::any_of(starts.begin(), starts.end(), [&](const auto& o) {
      return (o - u).template lpNorm<Eigen::Infinity>() <= 1e-12;
    });
    if (!duplicate) starts.push_back(std::move(u));
  }

  const Ascent ascent(gp, safety, n, space, settings);
  Candidate best;
  best.value = -1.0;
  for (const auto& start : starts) {
    Candidate c = ascent.run(start);
    if (c.value > best.value) best = std::move(c);
  }
  choice.x = space.x_of(best.u);
  choice.z = space.z_of(best.u);
  choice.value = mutual_info(gp, choice.x, choice.z);
  choice.restarts_used = starts.size();
  const std::size_t screened_count = choice.diagnostics.candidates_screened;
  choice.diagnostics = diagnose(gp, choice.x, choice.z);
  choice.diagnostics.candidates_screened = screened_count;
  return choice;
}

}  // namespace safex
