#include "safex/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/QR>

namespace safex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas w^2 (q - p)^2 + f(p) over one lattice line.
void transform_line(const std::vector<double>& f, double w2, std::vector<double>& out,
                    std::vector<std::size_t>& v, std::vector<double>& z) {
  const std::size_t n = f.size();
  out.assign(n, kInf);
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (!any) {
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      any = true;
      continue;
    }
    while (true) {
      const double p = static_cast<double>(v[k]);
      const double qq = static_cast<double>(q);
      const double s = ((f[q] + w2 * qq * qq) - (f[v[k]] + w2 * p * p)) / (2.0 * w2 * (qq - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      if (s <= z[k]) {
        // k == 0 and the new parabola dominates everywhere.
        v[0] = q;
        z[0] = -kInf;
        z[1] = kInf;
        break;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  if (!any) return;
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double qq = static_cast<double>(q);
    while (z[k + 1] < qq) ++k;
    const double d = qq - static_cast<double>(v[k]);
    out[q] = w2 * d * d + f[v[k]];
  }
}

}  // namespace

GridDomain::GridDomain(Point origin, Eigen::MatrixXd steps, std::vector<std::size_t> counts)
    : origin_(std::move(origin)), steps_(std::move(steps)), counts_(std::move(counts)) {
  if (steps_.rows() != origin_.size() || steps_.cols() != static_cast<Eigen::Index>(counts_.size())) {
    throw std::invalid_argument("GridDomain: inconsistent dimensions");
  }
  if (counts_.empty()) throw std::invalid_argument("GridDomain: no axes");
  size_ = 1;
  for (std::size_t c : counts_) {
    if (c == 0) throw std::invalid_argument("GridDomain: empty axis");
    size_ *= c;
  }
  steps_pinv_ = steps_.completeOrthogonalDecomposition().pseudoInverse();
  points_.resize(origin_.size(), static_cast<Eigen::Index>(size_));
  std::vector<std::size_t> idx(counts_.size(), 0);
  for (std::size_t flat = 0; flat < size_; ++flat) {
    Point p = origin_;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      p += static_cast<double>(idx[k]) * steps_.col(static_cast<Eigen::Index>(k));
    }
    points_.col(static_cast<Eigen::Index>(flat)) = p;
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      if (++idx[k] < counts_[k]) break;
      idx[k] = 0;
    }
  }
}

GridDomain GridDomain::box(const Box& box, std::vector<std::size_t> counts) {
  if (counts.size() != box.dim()) throw std::invalid_argument("GridDomain: count per dimension");
  Eigen::MatrixXd steps = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(box.dim()),
                                                static_cast<Eigen::Index>(box.dim()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2) throw std::invalid_argument("GridDomain: at least 2 points per dimension");
    const auto kk = static_cast<Eigen::Index>(k);
    steps(kk, kk) = box.width()[kk] / static_cast<double>(counts[k] - 1);
  }
  GridDomain g(box.lower(), std::move(steps), std::move(counts));
  // Pin the upper faces exactly.
  for (std::size_t flat = 0; flat < g.size_; ++flat) {
    const auto multi = g.multi_index(flat);
    for (std::size_t k = 0; k < multi.size(); ++k) {
      if (multi[k] + 1 == g.counts_[k]) {
        g.points_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(flat)) =
            box.upper()[static_cast<Eigen::Index>(k)];
      }
    }
  }
  return g;
}

GridDomain GridDomain::box(const Box& box, std::size_t per_dim) {
  return GridDomain::box(box, std::vector<std::size_t>(box.dim(), per_dim));
}

GridDomain GridDomain::segment(const Point& start, const Point& end, std::size_t count) {
  if (count < 2) throw std::invalid_argument("GridDomain: a segment needs at least 2 points");
  Eigen::MatrixXd step = (end - start) / static_cast<double>(count - 1);
  GridDomain g(start, std::move(step), {count});
  g.points_.col(static_cast<Eigen::Index>(count - 1)) = end;
  return g;
}

std::vector<std::size_t> GridDomain::multi_index(std::size_t index) const {
  std::vector<std::size_t> m(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    m[k] = index % counts_[k];
    index /= counts_[k];
  }
  return m;
}

std::size_t GridDomain::flat_index(const std::vector<std::size_t>& multi) const {
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    flat += multi[k] * stride;
    stride *= counts_[k];
  }
  return flat;
}

std::size_t GridDomain::nearest_index(const Point& x) const {
  const Eigen::VectorXd coords = steps_pinv_ * (x - origin_);
  std::vector<std::size_t> m(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    const double c = std::round(coords[static_cast<Eigen::Index>(k)]);
    m[k] = static_cast<std::size_t>(
        std::clamp(c, 0.0, static_cast<double>(counts_[k] - 1)));
  }
  return flat_index(m);
}

Eigen::VectorXd GridDomain::scaled_steps(const RbfKernel& kernel) const {
  return (kernel.lengthscales().cwiseInverse().asDiagonal() * steps_).colwise().norm().transpose();
}

std::vector<double> squared_distance_transform(const GridDomain& grid,
                                               const std::vector<bool>& sites,
                                               const Eigen::VectorXd& weights) {
  if (sites.size() != grid.size()) {
    throw std::invalid_argument("squared_distance_transform: mask size mismatch");
  }
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = sites[i] ? 0.0 : kInf;

  const auto& counts = grid.counts();
  std::vector<double> line;
  std::vector<double> out;
  std::vector<std::size_t> v;
  std::vector<double> z;
  std::size_t stride = 1;
  for (std::size_t axis = 0; axis < counts.size(); ++axis) {
    const std::size_t n = counts[axis];
    const double w = weights[static_cast<Eigen::Index>(axis)];
    const double w2 = w * w;
    const std::size_t block = stride * n;
    line.resize(n);
    for (std::size_t base = 0; base < grid.size(); base += block) {
      for (std::size_t offset = 0; offset < stride; ++offset) {
        const std::size_t start = base + offset;
        for (std::size_t i = 0; i < n; ++i) line[i] = d[start + i * stride];
        if (w2 > 0.0) {
          transform_line(line, w2, out, v, z);
        } else {
          const double m = *std::min_element(line.begin(), line.end());
          out.assign(n, m);
        }
        for (std::size_t i = 0; i < n; ++i) d[start + i * stride] = out[i];
      }
    }
    stride = block;
  }
  return d;
}

}  // namespace safex
