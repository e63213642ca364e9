#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include "seismap/fusion.hpp"
#include "support.hpp"

using namespace seismap;

namespace {

ViewSet random_views(Index m, Index l, std::uint64_t seed) {
  ViewSet vs;
  for (Index v = 0; v < l; ++v) vs.views.push_back(testing::random_points(m, 3 + v, seed * 10 + static_cast<std::uint64_t>(v)));
  return vs;
}

}  // namespace

TEST_CASE("block kernel layout") {
  const ViewSet vs = random_views(12, 3, 1);
  const auto ks = per_view_kernels(vs);
  const MultiViewOperator mv = build_multiview(ks);
  CHECK(mv.kernel.rows() == 36);
  for (Index l = 0; l < 3; ++l)
    for (Index q = 0; q < 3; ++q) {
      const Eigen::MatrixXd block = mv.kernel.block(l * 12, q * 12, 12, 12);
      if (l == q) {
        CHECK(block.cwiseAbs().maxCoeff() == 0.0);
      } else {
        // Element loop for K^l K^q.
        for (Index i = 0; i < 12; i += 5)
          for (Index j = 0; j < 12; j += 3) {
            double acc = 0.0;
            for (Index s = 0; s < 12; ++s)
              acc += ks[static_cast<std::size_t>(l)].values(i, s) * ks[static_cast<std::size_t>(q)].values(s, j);
            CHECK(block(i, j) == doctest::Approx(acc).epsilon(1e-13));
          }
      }
    }
  CHECK((mv.kernel - mv.kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("multi-view operator spectrum") {
  const MultiViewOperator mv = build_multiview(per_view_kernels(random_views(20, 3, 2)));
  CHECK((mv.op.transition.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  const Eigen::VectorXd spec = operator_spectrum(mv.op);
  CHECK(spec(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(spec(spec.size() - 1) < 0.0);
}

TEST_CASE("two-view block operator is bipartite: -1 is an eigenvalue") {
  const MultiViewOperator mv = build_multiview(per_view_kernels(random_views(15, 2, 3)));
  const Eigen::VectorXd spec = operator_spectrum(mv.op);
  CHECK(spec(spec.size() - 1) == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("multiview_embed splits the eigenvectors by view") {
  const MultiViewOperator mv = build_multiview(per_view_kernels(random_views(16, 3, 4)));
  const MultiViewEmbedding e = multiview_embed(mv, 4);
  const Embedding full = embed(mv.op, 4);
  REQUIRE(e.per_view_coords.size() == 3);
  CHECK(e.concatenated.rows() == 16);
  CHECK(e.concatenated.cols() == 12);
  for (Index l = 0; l < 3; ++l) {
    CHECK(e.per_view_coords[static_cast<std::size_t>(l)] == full.coords.middleRows(l * 16, 16));
    CHECK(e.concatenated.middleCols(l * 4, 4) == e.per_view_coords[static_cast<std::size_t>(l)]);
  }
}

TEST_CASE("kernel sum of identical views equals the single view") {
  const KernelMatrix k = rbf_kernel_max_min(testing::random_points(25, 4, 5));
  const DiffusionOperator single = row_normalize(k);
  const DiffusionOperator ks = kernel_sum(std::vector<KernelMatrix>{k, k, k});
  CHECK((ks.transition - single.transition).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kernel product with an all-ones view equals the single view") {
  const KernelMatrix k = rbf_kernel_max_min(testing::random_points(25, 4, 6));
  KernelMatrix ones;
  ones.values = Eigen::MatrixXd::Ones(25, 25);
  const DiffusionOperator kp = kernel_product(std::vector<KernelMatrix>{k, ones});
  CHECK((kp.transition - row_normalize(k).transition).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fusion shape checks") {
  const KernelMatrix a = rbf_kernel_max_min(testing::random_points(5, 2, 7));
  const KernelMatrix b = rbf_kernel_max_min(testing::random_points(6, 2, 8));
  CHECK_THROWS_AS(kernel_sum(std::vector<KernelMatrix>{a, b}), SizeError);
  CHECK_THROWS_AS(build_multiview(std::vector<KernelMatrix>{a}), ConfigError);
  ViewSet vs;
  vs.views = {testing::random_points(5, 2, 1), testing::random_points(4, 2, 2)};
  CHECK_THROWS_AS(vs.validate(), SizeError);
}

TEST_CASE("KCCA matches a generalized symmetric eigensolver") {
  const Index m = 15;
  const double gamma = 1e-2;
  const KernelMatrix k1 = rbf_kernel_max_min(testing::random_points(m, 3, 9));
  const KernelMatrix k2 = rbf_kernel_max_min(testing::random_points(m, 4, 10));

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  a.topRightCorner(m, m) = k1.values * k2.values;
  a.bottomLeftCorner(m, m) = k2.values * k1.values;
  b.topLeftCorner(m, m) = (k1.values + gamma * id) * (k1.values + gamma * id);
  b.bottomRightCorner(m, m) = (k2.values + gamma * id) * (k2.values + gamma * id);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> oracle(a, b);
  const Eigen::VectorXd rho_oracle = oracle.eigenvalues().reverse();

  const auto pairs = kcca_pairs(k1, k2, gamma, 3);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(pairs[p].rho == doctest::Approx(rho_oracle(static_cast<Index>(p))).epsilon(1e-6));
    CHECK(kcca_residual(k1, k2, pairs[p]) <= 1e-8);
    const double n1 = pairs[p].v1.dot(b.topLeftCorner(m, m) * pairs[p].v1);
    CHECK(n1 == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("KCCA on identical views is near-perfectly correlated") {
  const KernelMatrix k = rbf_kernel_max_min(testing::random_points(20, 3, 11));
  const KccaResult r = kcca(k, k, 1e-3);
  CHECK(r.rho >= 0.99);
  CHECK(kcca_residual(k, k, r) <= 1e-8);
}

TEST_CASE("KCCA embedding interleaves the two projections") {
  const KernelMatrix k1 = rbf_kernel_max_min(testing::random_points(18, 3, 12));
  const KernelMatrix k2 = rbf_kernel_max_min(testing::random_points(18, 3, 13));
  Eigen::VectorXd rho;
  const Eigen::MatrixXd e = kcca_embed(k1, k2, 1e-2, 3, &rho);
  const auto pairs = kcca_pairs(k1, k2, 1e-2, 2);
  CHECK(e.cols() == 3);
  CHECK((e.col(0) - k1.values * pairs[0].v1).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((e.col(1) - k2.values * pairs[0].v2).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((e.col(2) - k1.values * pairs[1].v1).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(rho(0) == rho(1));
}

TEST_CASE("KCCA argument checks") {
  const KernelMatrix k = rbf_kernel_max_min(testing::random_points(6, 2, 14));
  CHECK_THROWS_AS(kcca(k, k, 0.0), ConfigError);
  CHECK_THROWS_AS(kcca_pairs(k, k, 1e-3, 7), ConfigError);
}
