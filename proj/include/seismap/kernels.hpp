#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "seismap/errors.hpp"
#include "seismap/signal.hpp"

namespace seismap {

/// M points of dimension D stored one per row, with identifiers aligned to
/// the catalog.
template <typename Scalar>
struct BasicDataMatrix {
  MatrixX<Scalar> points;
  std::vector<std::string> point_ids;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

using DataMatrix = BasicDataMatrix<double>;

template <typename Scalar>
struct BasicKernelMatrix {
  MatrixX<Scalar> values;
  Scalar sigma2{1};
  std::optional<Channel> view;

  Index size() const { return values.rows(); }
};

using KernelMatrix = BasicKernelMatrix<double>;

/// Pairwise squared Euclidean distances between the rows of `x`, computed
/// from explicit differences (no Gram-matrix shortcut).
template <typename Derived>
MatrixX<typename Derived::Scalar> squared_distances(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> cols = x.transpose();  // one point per contiguous column
  const Index m = cols.cols();
  MatrixX<Scalar> d2 = MatrixX<Scalar>::Zero(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = j + 1; i < m; ++i) {
      const Scalar v = (cols.col(i) - cols.col(j)).squaredNorm();
      d2(i, j) = v;
      d2(j, i) = v;
    }
  return d2;
}

/// C * max_j min_{i != j} ||x_i - x_j||^2, from a precomputed distance matrix.
template <typename Derived>
typename Derived::Scalar max_min_bandwidth_from_distances(const Eigen::MatrixBase<Derived>& d2, double c) {
  using Scalar = typename Derived::Scalar;
  const Index m = d2.rows();
  if (m < 2) throw SizeError("bandwidth selection needs at least two points");
  if (!(c > 0.0)) throw ConfigError("bandwidth constant C must be positive");
  Scalar worst{0};
  for (Index j = 0; j < m; ++j) {
    Scalar nearest = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < m; ++i)
      if (i != j) nearest = std::min(nearest, d2(i, j));
    worst = std::max(worst, nearest);
  }
  if (!(worst > Scalar{0}))
    throw DegenerateError("every point coincides with another point; the max-min scale is zero");
  return static_cast<Scalar>(c) * worst;
}

template <typename Derived>
typename Derived::Scalar max_min_bandwidth(const Eigen::MatrixBase<Derived>& x, double c = 2.0) {
  return max_min_bandwidth_from_distances(squared_distances(x), c);
}

template <typename Derived>
BasicKernelMatrix<typename Derived::Scalar> rbf_kernel_from_distances(const Eigen::MatrixBase<Derived>& d2,
                                                                      typename Derived::Scalar sigma2) {
  using Scalar = typename Derived::Scalar;
  if (!(sigma2 > Scalar{0})) throw ConfigError("kernel bandwidth sigma^2 must be positive");
  const Index m = d2.rows();
  BasicKernelMatrix<Scalar> k;
  k.sigma2 = sigma2;
  k.values.resize(m, m);
  const Scalar scale = Scalar{1} / (Scalar{2} * sigma2);
  for (Index j = 0; j < m; ++j) {
    k.values(j, j) = Scalar{1};
    for (Index i = j + 1; i < m; ++i) {
      const Scalar v = std::exp(-d2(i, j) * scale);
      k.values(i, j) = v;
      k.values(j, i) = v;
    }
  }
  return k;
}

/// K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)).
template <typename Derived>
BasicKernelMatrix<typename Derived::Scalar> rbf_kernel(const Eigen::MatrixBase<Derived>& x,
                                                       typename Derived::Scalar sigma2) {
  if (!(sigma2 > 0)) throw ConfigError("kernel bandwidth sigma^2 must be positive");
  return rbf_kernel_from_distances(squared_distances(x), sigma2);
}

/// RBF kernel with the max-min bandwidth chosen from the data itself.
template <typename Derived>
BasicKernelMatrix<typename Derived::Scalar> rbf_kernel_max_min(const Eigen::MatrixBase<Derived>& x, double c = 2.0) {
  const auto d2 = squared_distances(x);
  return rbf_kernel_from_distances(d2, max_min_bandwidth_from_distances(d2, c));
}

}  // namespace seismap
