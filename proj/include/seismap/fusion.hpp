#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "seismap/diffusion.hpp"
#include "seismap/errors.hpp"
#include "seismap/kernels.hpp"

namespace seismap {

/// L views of the same M points. Views may differ in dimension.
template <typename Scalar>
struct BasicViewSet {
  std::vector<MatrixX<Scalar>> views;
  std::vector<std::optional<Channel>> tags;
  std::vector<std::string> point_ids;

  Index num_views() const { return static_cast<Index>(views.size()); }
  Index num_points() const { return views.empty() ? 0 : views.front().rows(); }

  void validate() const {
    if (views.size() < 2) throw ConfigError("multi-view fusion needs at least two views");
    for (const auto& v : views)
      if (v.rows() != views.front().rows()) throw SizeError("all views must hold the same number of points");
    if (!point_ids.empty() && static_cast<Index>(point_ids.size()) != num_points())
      throw SizeError("point identifiers do not match the number of points");
  }
};

using ViewSet = BasicViewSet<double>;

namespace detail {

template <typename Scalar>
void check_same_shape(const std::vector<BasicKernelMatrix<Scalar>>& ks) {
  if (ks.empty()) throw ConfigError("no kernels given");
  for (const auto& k : ks)
    if (k.values.rows() != ks.front().values.rows() || k.values.cols() != ks.front().values.cols())
      throw SizeError("kernels must share one shape");
}

}  // namespace detail

/// One RBF kernel per view. Bandwidths default to max-min per view.
template <typename Scalar>
std::vector<BasicKernelMatrix<Scalar>> per_view_kernels(const BasicViewSet<Scalar>& vs, double c = 2.0,
                                                        const std::vector<Scalar>& sigma2 = {}) {
  vs.validate();
  if (!sigma2.empty() && sigma2.size() != vs.views.size())
    throw ConfigError("need exactly one bandwidth per view");
  std::vector<BasicKernelMatrix<Scalar>> out;
  out.reserve(vs.views.size());
  for (std::size_t l = 0; l < vs.views.size(); ++l) {
    auto k = sigma2.empty() ? rbf_kernel_max_min(vs.views[l], c) : rbf_kernel(vs.views[l], sigma2[l]);
    if (l < vs.tags.size()) k.view = vs.tags[l];
    out.push_back(std::move(k));
  }
  return out;
}

/// Block kernel with zero diagonal blocks and K^l K^m off the diagonal,
/// plus its row-stochastic normalisation.
template <typename Scalar>
struct BasicMultiViewOperator {
  MatrixX<Scalar> kernel;  // LM x LM
  BasicDiffusionOperator<Scalar> op;
  Index views{0};
  Index points{0};

  Index block_offset(Index l) const { return l * points; }
};

using MultiViewOperator = BasicMultiViewOperator<double>;

template <typename Scalar>
BasicMultiViewOperator<Scalar> build_multiview(const std::vector<BasicKernelMatrix<Scalar>>& ks) {
  detail::check_same_shape(ks);
  if (ks.size() < 2) throw ConfigError("multi-view fusion needs at least two kernels");
  const Index m = ks.front().size();
  const Index l_count = static_cast<Index>(ks.size());
  BasicMultiViewOperator<Scalar> out;
  out.views = l_count;
  out.points = m;
  out.kernel = MatrixX<Scalar>::Zero(l_count * m, l_count * m);
  for (Index l = 0; l < l_count; ++l)
    for (Index q = l + 1; q < l_count; ++q) {
      out.kernel.block(l * m, q * m, m, m).noalias() =
          ks[static_cast<std::size_t>(l)].values * ks[static_cast<std::size_t>(q)].values;
      out.kernel.block(q * m, l * m, m, m) = out.kernel.block(l * m, q * m, m, m).transpose();
    }
  out.op = row_normalize(out.kernel);
  return out;
}

template <typename Scalar>
struct BasicMultiViewEmbedding {
  std::vector<MatrixX<Scalar>> per_view_coords;  // L blocks of M x d
  MatrixX<Scalar> concatenated;                  // M x (L d)
  VectorX<Scalar> eigenvalues;
  int t{1};
};

using MultiViewEmbedding = BasicMultiViewEmbedding<double>;

/// Diffusion coordinates of the block operator; view l reads rows
/// [l M, (l + 1) M) of each eigenvector and the views are concatenated.
template <typename Scalar>
BasicMultiViewEmbedding<Scalar> multiview_embed(const BasicMultiViewOperator<Scalar>& mv, Index d, int t = 1) {
  const BasicEmbedding<Scalar> full = embed(mv.op, d, t);
  BasicMultiViewEmbedding<Scalar> out;
  out.eigenvalues = full.eigenvalues;
  out.t = t;
  out.concatenated.resize(mv.points, mv.views * d);
  for (Index l = 0; l < mv.views; ++l) {
    out.per_view_coords.push_back(full.coords.middleRows(mv.block_offset(l), mv.points));
    out.concatenated.middleCols(l * d, d) = out.per_view_coords.back();
  }
  return out;
}

/// Element-wise product of the view kernels, row-normalised.
template <typename Scalar>
BasicDiffusionOperator<Scalar> kernel_product(const std::vector<BasicKernelMatrix<Scalar>>& ks) {
  detail::check_same_shape(ks);
  MatrixX<Scalar> prod = ks.front().values;
  for (std::size_t l = 1; l < ks.size(); ++l) prod = prod.cwiseProduct(ks[l].values);
  return row_normalize(prod);
}

/// Sum of the view kernels, row-normalised.
template <typename Scalar>
BasicDiffusionOperator<Scalar> kernel_sum(const std::vector<BasicKernelMatrix<Scalar>>& ks) {
  detail::check_same_shape(ks);
  MatrixX<Scalar> sum = ks.front().values;
  for (std::size_t l = 1; l < ks.size(); ++l) sum += ks[l].values;
  return row_normalize(sum);
}

template <typename Scalar>
struct BasicKccaResult {
  VectorX<Scalar> v1;
  VectorX<Scalar> v2;
  Scalar rho{0};
  Scalar gamma{0};
};

using KccaResult = BasicKccaResult<double>;

namespace detail {

// (K + gamma I)^-1 K and (K + gamma I)^-1 from one symmetric eigendecomposition.
template <typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> regularised_factors(const MatrixX<Scalar>& k, Scalar gamma) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(k);
  if (es.info() != Eigen::Success) throw NumericError("kernel eigendecomposition did not converge");
  const VectorX<Scalar> mu = es.eigenvalues();
  const VectorX<Scalar> shifted = mu.array() + gamma;
  const Scalar smallest = shifted.minCoeff();
  const Scalar largest = shifted.maxCoeff();
  if (!(smallest > Scalar{0}) || largest / smallest > Scalar{1e14}) {
    std::ostringstream msg;
    msg << "regularised kernel is numerically singular (min eigenvalue " << smallest << ", condition "
        << largest / smallest << "); increase gamma";
    throw NumericError(msg.str());
  }
  const MatrixX<Scalar>& u = es.eigenvectors();
  MatrixX<Scalar> smoother = u * (mu.array() / shifted.array()).matrix().asDiagonal() * u.transpose();
  MatrixX<Scalar> inverse = u * shifted.cwiseInverse().asDiagonal() * u.transpose();
  return {std::move(smoother), std::move(inverse)};
}

}  // namespace detail

/// Leading `count` canonical pairs of the regularised kernel CCA problem
///   [0 K1K2; K2K1 0] v = rho [(K1+gI)^2 0; 0 (K2+gI)^2] v.
/// Substituting w_l = (K_l + gI) v_l turns it into the SVD of
/// C = (K1+gI)^-1 K1 K2 (K2+gI)^-1. Vectors are scaled so that
/// v_l^T (K_l+gI)^2 v_l = 1.
template <typename Scalar>
std::vector<BasicKccaResult<Scalar>> kcca_pairs(const BasicKernelMatrix<Scalar>& k1, const BasicKernelMatrix<Scalar>& k2,
                                                Scalar gamma, Index count) {
  if (!(gamma > Scalar{0})) throw ConfigError("KCCA regulariser gamma must be positive");
  if (k1.values.rows() != k2.values.rows()) throw SizeError("KCCA kernels must have the same size");
  const Index m = k1.size();
  if (count < 1 || count > m) throw ConfigError("requested KCCA pair count is out of range");

  const auto [s1, inv1] = detail::regularised_factors(k1.values, gamma);
  const auto [s2, inv2] = detail::regularised_factors(k2.values, gamma);
  const MatrixX<Scalar> c = s1 * s2;
  Eigen::BDCSVD<MatrixX<Scalar>> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);

  std::vector<BasicKccaResult<Scalar>> out;
  for (Index p = 0; p < count; ++p) {
    BasicKccaResult<Scalar> r;
    r.gamma = gamma;
    r.rho = svd.singularValues()(p);
    r.v1 = inv1 * svd.matrixU().col(p);
    r.v2 = inv2 * svd.matrixV().col(p);
    Index arg = 0;
    r.v1.cwiseAbs().maxCoeff(&arg);
    if (r.v1(arg) < Scalar{0}) {
      r.v1 = -r.v1;
      r.v2 = -r.v2;
    }
    out.push_back(std::move(r));
  }
  return out;
}

template <typename Scalar>
BasicKccaResult<Scalar> kcca(const BasicKernelMatrix<Scalar>& k1, const BasicKernelMatrix<Scalar>& k2,
                             Scalar gamma = Scalar{1e-3}) {
  return kcca_pairs(k1, k2, gamma, 1).front();
}

/// Relative residual ||A v - rho B v|| / ((||A|| + |rho| ||B||) ||v||) of the
/// generalized eigenproblem, with Frobenius norms.
template <typename Scalar>
Scalar kcca_residual(const BasicKernelMatrix<Scalar>& k1, const BasicKernelMatrix<Scalar>& k2,
                     const BasicKccaResult<Scalar>& r) {
  const Index m = k1.size();
  const MatrixX<Scalar> id = MatrixX<Scalar>::Identity(m, m);
  const MatrixX<Scalar> k12 = k1.values * k2.values;
  const MatrixX<Scalar> b1 = (k1.values + r.gamma * id) * (k1.values + r.gamma * id);
  const MatrixX<Scalar> b2 = (k2.values + r.gamma * id) * (k2.values + r.gamma * id);
  const VectorX<Scalar> top = k12 * r.v2 - r.rho * (b1 * r.v1);
  const VectorX<Scalar> bottom = k12.transpose() * r.v1 - r.rho * (b2 * r.v2);
  const Scalar residual = std::sqrt(top.squaredNorm() + bottom.squaredNorm());
  const Scalar a_norm = std::sqrt(Scalar{2}) * k12.norm();
  const Scalar b_norm = std::sqrt(b1.squaredNorm() + b2.squaredNorm());
  const Scalar v_norm = std::sqrt(r.v1.squaredNorm() + r.v2.squaredNorm());
  return residual / ((a_norm + std::abs(r.rho) * b_norm) * v_norm);
}

/// d-dimensional KCCA representation: for each of the leading ceil(d/2)
/// pairs, the projections K1 v1 and K2 v2, truncated to d columns.
template <typename Scalar>
MatrixX<Scalar> kcca_embed(const BasicKernelMatrix<Scalar>& k1, const BasicKernelMatrix<Scalar>& k2, Scalar gamma,
                           Index d, VectorX<Scalar>* correlations = nullptr) {
  if (d < 1) throw ConfigError("KCCA embedding dimension must be positive");
  const Index pairs = (d + 1) / 2;
  const auto results = kcca_pairs(k1, k2, gamma, pairs);
  MatrixX<Scalar> out(k1.size(), d);
  if (correlations) correlations->resize(d);
  for (Index c = 0; c < d; ++c) {
    const auto& r = results[static_cast<std::size_t>(c / 2)];
    out.col(c) = (c % 2 == 0) ? (k1.values * r.v1).eval() : (k2.values * r.v2).eval();
    if (correlations) (*correlations)(c) = r.rho;
  }
  return out;
}

}  // namespace seismap
