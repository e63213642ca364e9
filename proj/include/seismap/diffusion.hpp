#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "seismap/errors.hpp"
#include "seismap/kernels.hpp"

namespace seismap {

/// Row-stochastic transition matrix P = D^-1 K together with the degrees
/// D_ii and the stationary weights W_ii = D_ii / sum(D).
template <typename Scalar>
struct BasicDiffusionOperator {
  MatrixX<Scalar> transition;
  VectorX<Scalar> degree;
  VectorX<Scalar> weights;

  Index size() const { return transition.rows(); }
};

using DiffusionOperator = BasicDiffusionOperator<double>;

template <typename Derived>
BasicDiffusionOperator<typename Derived::Scalar> row_normalize(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::Scalar;
  if (k.rows() != k.cols()) throw SizeError("kernel matrix must be square");
  BasicDiffusionOperator<Scalar> op;
  op.degree = k.rowwise().sum();
  for (Index i = 0; i < op.degree.size(); ++i)
    if (!(op.degree(i) > Scalar{0}) || !std::isfinite(static_cast<double>(op.degree(i))))
      throw DegenerateError("kernel row " + std::to_string(i) + " has no positive mass");
  op.transition = k.array().colwise() / op.degree.array();
  op.weights = op.degree / op.degree.sum();
  return op;
}

template <typename Scalar>
BasicDiffusionOperator<Scalar> row_normalize(const BasicKernelMatrix<Scalar>& k) {
  return row_normalize(k.values);
}

/// Low-dimensional diffusion coordinates. Column m of `coords` is
/// lambda_m^t * psi_m; `eigenvectors` keeps psi_m itself.
template <typename Scalar>
struct BasicEmbedding {
  MatrixX<Scalar> coords;
  VectorX<Scalar> eigenvalues;
  MatrixX<Scalar> eigenvectors;
  int t{1};
  Scalar trivial_eigenvalue{1};

  Index dims() const { return coords.cols(); }
  Index size() const { return coords.rows(); }
};

using Embedding = BasicEmbedding<double>;

namespace detail {

// D^{1/2} P D^{-1/2}, which equals D^{-1/2} K D^{-1/2} when K is symmetric.
template <typename Scalar>
MatrixX<Scalar> symmetric_conjugate(const BasicDiffusionOperator<Scalar>& op) {
  const VectorX<Scalar> s = op.degree.cwiseSqrt();
  MatrixX<Scalar> a = s.asDiagonal() * op.transition * s.cwiseInverse().asDiagonal();
  return (Scalar{0.5} * (a + a.transpose())).eval();
}

template <typename Derived>
Index first_sign_change(const Eigen::MatrixBase<Derived>& v) {
  for (Index i = 1; i < v.size(); ++i)
    if ((v(i) < 0) != (v(0) < 0)) return i;
  return v.size();
}

template <typename Scalar>
void fix_sign(Eigen::Ref<VectorX<Scalar>> v) {
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < Scalar{0}) v = -v;
}

}  // namespace detail

/// All eigenvalues of P in descending order (computed from the symmetric form).
template <typename Scalar>
VectorX<Scalar> operator_spectrum(const BasicDiffusionOperator<Scalar>& op) {
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(detail::symmetric_conjugate(op), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation did not converge");
  return es.eigenvalues().reverse();
}

/// The d leading non-trivial right eigenpairs of P, descending in lambda.
///
/// P is similar to the symmetric A = D^-1/2 K D^-1/2, so A is decomposed and
/// each unit eigenvector phi is mapped back as psi = sqrt(sum D) D^-1/2 phi.
/// With this scaling psi^T W psi = 1 and the Euclidean distance between
/// full-dimensional coordinates equals the diffusion distance exactly. The
/// trivial pair (1, constant) is checked and dropped. Each psi is signed so
/// its largest-magnitude entry is positive.
template <typename Scalar>
BasicEmbedding<Scalar> spectral_decompose(const BasicDiffusionOperator<Scalar>& op, Index d) {
  const Index m = op.size();
  if (d < 1 || d > m - 1)
    throw ConfigError("embedding dimension " + std::to_string(d) + " must lie in [1, " + std::to_string(m - 1) + "]");

  const MatrixX<Scalar> a = detail::symmetric_conjugate(op);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(a);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");

  // Descending order.
  VectorX<Scalar> evals = es.eigenvalues().reverse();
  MatrixX<Scalar> evecs = es.eigenvectors().rowwise().reverse();

  const VectorX<Scalar> sqrt_degree = op.degree.cwiseSqrt();
  const VectorX<Scalar> phi0 = sqrt_degree / sqrt_degree.norm();
  const Scalar top = evals(0);
  if (std::abs(top - Scalar{1}) > Scalar{1e-8}) {
    std::ostringstream msg;
    msg << "leading eigenvalue " << top << " differs from 1; the operator is not a valid transition matrix";
    throw NumericError(msg.str());
  }

  Index cluster = 1;
  while (cluster < m && evals(cluster) >= top - Scalar{1e-10}) ++cluster;
  if (cluster == 1) {
    if (std::abs(evecs.col(0).dot(phi0)) < Scalar{1} - Scalar{1e-8})
      throw NumericError("eigenvector of the unit eigenvalue is not constant");
  } else {
    // Disconnected graph: the unit eigenspace is degenerate. Remove the
    // constant direction and re-orthonormalise what remains.
    MatrixX<Scalar> block = evecs.leftCols(cluster);
    block -= phi0 * (phi0.transpose() * block);
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(block, Eigen::ComputeThinU);
    evecs.leftCols(cluster - 1) = svd.matrixU().leftCols(cluster - 1);
    evecs.col(cluster - 1) = phi0;
    for (Index c = 0; c < cluster - 1; ++c) evals(c) = evecs.col(c).dot(a * evecs.col(c));
    evals(cluster - 1) = top;
    // Trivial pair now sits at cluster - 1; rotate it to the front.
    std::vector<Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::rotate(order.begin(), order.begin() + (cluster - 1), order.begin() + cluster);
    VectorX<Scalar> e2(m);
    MatrixX<Scalar> v2(m, m);
    for (Index c = 0; c < m; ++c) {
      e2(c) = evals(order[static_cast<std::size_t>(c)]);
      v2.col(c) = evecs.col(order[static_cast<std::size_t>(c)]);
    }
    evals = std::move(e2);
    evecs = std::move(v2);
  }

  const Scalar volume = op.degree.sum();
  const VectorX<Scalar> inv_sqrt_degree = sqrt_degree.cwiseInverse();

  // Candidate non-trivial pairs in descending order; exact ties are ordered
  // by the first sign change of psi.
  std::vector<Index> order;
  for (Index c = 1; c < m; ++c) order.push_back(c);
  MatrixX<Scalar> psi_all = (std::sqrt(volume) * inv_sqrt_degree).asDiagonal() * evecs;
  for (Index c = 1; c < m; ++c) detail::fix_sign<Scalar>(psi_all.col(c));
  for (std::size_t g = 0; g < order.size();) {
    std::size_t h = g + 1;
    while (h < order.size() && evals(order[g]) - evals(order[h]) <= Scalar{1e-12}) ++h;
    if (h - g > 1)
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(g), order.begin() + static_cast<std::ptrdiff_t>(h),
                       [&](Index lhs, Index rhs) {
                         return detail::first_sign_change(psi_all.col(lhs)) <
                                detail::first_sign_change(psi_all.col(rhs));
                       });
    g = h;
  }

  BasicEmbedding<Scalar> out;
  out.t = 1;
  out.trivial_eigenvalue = top;
  out.eigenvalues.resize(d);
  out.eigenvectors.resize(m, d);
  for (Index c = 0; c < d; ++c) {
    const Index src = order[static_cast<std::size_t>(c)];
    out.eigenvalues(c) = evals(src);
    out.eigenvectors.col(c) = psi_all.col(src);
  }

  const Scalar tolerance = Scalar{1e-8} * static_cast<Scalar>(m);
  for (Index c = 0; c < d; ++c) {
    const Scalar residual =
        (op.transition * out.eigenvectors.col(c) - out.eigenvalues(c) * out.eigenvectors.col(c)).norm();
    if (!(residual <= tolerance)) {
      std::ostringstream msg;
      msg << "eigenpair " << c + 1 << " (lambda=" << out.eigenvalues(c) << ") has residual " << residual
          << " > " << tolerance << "; min degree " << op.degree.minCoeff() << ", max degree "
          << op.degree.maxCoeff();
      throw NumericError(msg.str());
    }
  }
  out.coords = out.eigenvectors * out.eigenvalues.asDiagonal();
  return out;
}

/// Diffusion coordinates lambda_m^t psi_m(i) for a positive integer time t.
template <typename Scalar>
BasicEmbedding<Scalar> embed(const BasicDiffusionOperator<Scalar>& op, Index d, int t = 1) {
  if (t < 1) throw ConfigError("diffusion time must be a positive integer");
  BasicEmbedding<Scalar> out = spectral_decompose(op, d);
  out.t = t;
  VectorX<Scalar> weights(d);
  for (Index c = 0; c < d; ++c) weights(c) = static_cast<Scalar>(std::pow(out.eigenvalues(c), t));
  out.coords = out.eigenvectors * weights.asDiagonal();
  return out;
}

/// Squared diffusion distance sum_k (P^t_ik - P^t_jk)^2 / W_k, evaluated
/// directly from the transition matrix.
template <typename Scalar>
Scalar diffusion_distance(const BasicDiffusionOperator<Scalar>& op, Index i, Index j, int t = 1) {
  const Index m = op.size();
  if (i < 0 || j < 0 || i >= m || j >= m) throw ConfigError("point index out of range");
  if (t < 1) throw ConfigError("diffusion time must be a positive integer");
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> ri = op.transition.row(i);
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> rj = op.transition.row(j);
  for (int step = 1; step < t; ++step) {
    ri = (ri * op.transition).eval();
    rj = (rj * op.transition).eval();
  }
  return ((ri - rj).array().square() / op.weights.transpose().array()).sum();
}

template <typename Scalar>
struct BasicPcaModel {
  VectorX<Scalar> mean;
  MatrixX<Scalar> components;  // d x D, orthonormal rows
  VectorX<Scalar> explained_variance;
};

using PcaModel = BasicPcaModel<double>;

template <typename Derived>
BasicPcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& x, Index d) {
  using Scalar = typename Derived::Scalar;
  const Index m = x.rows();
  if (m < 2) throw SizeError("PCA needs at least two points");
  if (d < 1 || d > std::min(m, x.cols()))
    throw ConfigError("PCA dimension " + std::to_string(d) + " exceeds min(M, D) = " +
                      std::to_string(std::min(m, x.cols())));
  BasicPcaModel<Scalar> model;
  model.mean = x.colwise().mean().transpose();
  const MatrixX<Scalar> centered = x.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<MatrixX<Scalar>> svd(centered, Eigen::ComputeThinV);
  model.components = svd.matrixV().leftCols(d).transpose();
  for (Index c = 0; c < d; ++c) {
    VectorX<Scalar> row = model.components.row(c).transpose();
    detail::fix_sign<Scalar>(row);
    model.components.row(c) = row.transpose();
  }
  model.explained_variance = svd.singularValues().head(d).array().square() / static_cast<Scalar>(m - 1);
  return model;
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> pca_project(const BasicPcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != model.mean.size()) throw SizeError("PCA input dimension does not match the fitted model");
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

}  // namespace seismap
