#include <cmath>
#include <limits>

#include <doctest.h>

#include "seismap/kernels.hpp"
#include "support.hpp"

using namespace seismap;

TEST_CASE("squared distances match an element loop") {
  const Eigen::MatrixXd x = testing::random_points(25, 6, 1);
  const Eigen::MatrixXd d2 = squared_distances(x);
  for (Index i = 0; i < 25; ++i)
    for (Index j = 0; j < 25; ++j) {
      double acc = 0.0;
      for (Index c = 0; c < 6; ++c) acc += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      CHECK(d2(i, j) == doctest::Approx(acc).epsilon(1e-14));
    }
  CHECK(d2.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("max-min bandwidth against brute force") {
  const Eigen::MatrixXd x = testing::random_points(30, 4, 2);
  double worst = 0.0;
  for (Index j = 0; j < 30; ++j) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < 30; ++i)
      if (i != j) nearest = std::min(nearest, (x.row(i) - x.row(j)).squaredNorm());
    worst = std::max(worst, nearest);
  }
  CHECK(max_min_bandwidth(x, 2.0) == doctest::Approx(2.0 * worst).epsilon(1e-13));
  CHECK(max_min_bandwidth(x, 3.0) == doctest::Approx(3.0 * worst).epsilon(1e-13));
}

TEST_CASE("max-min bandwidth errors") {
  Eigen::MatrixXd dup(4, 2);
  dup << 0, 0, 0, 0, 1, 1, 1, 1;
  CHECK_THROWS_AS(max_min_bandwidth(dup), DegenerateError);
  CHECK_THROWS_AS(max_min_bandwidth(Eigen::MatrixXd::Ones(1, 3).eval()), SizeError);
  CHECK_THROWS_AS(max_min_bandwidth(testing::random_points(5, 2, 3), 0.0), ConfigError);
}

TEST_CASE("rbf kernel entries match the formula") {
  const Eigen::MatrixXd x = testing::random_points(12, 3, 4);
  const KernelMatrix k = rbf_kernel(x, 0.7);
  CHECK(k.sigma2 == 0.7);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j)
      CHECK(k.values(i, j) == doctest::Approx(std::exp(-(x.row(i) - x.row(j)).squaredNorm() / 1.4)).epsilon(1e-14));
  CHECK_THROWS_AS(rbf_kernel(x, 0.0), ConfigError);
  CHECK_THROWS_AS(rbf_kernel(x, -1.0), ConfigError);
}

TEST_CASE("property: kernels are symmetric, unit-diagonal and bounded") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd x = testing::random_points(15 + static_cast<Index>(seed), 3 + static_cast<Index>(seed % 4), seed);
    const KernelMatrix k = rbf_kernel_max_min(x, 2.0);
    CHECK((k.values - k.values.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((k.values.diagonal().array() - 1.0).abs().maxCoeff() == 0.0);
    CHECK(k.values.minCoeff() >= 0.0);
    CHECK(k.values.maxCoeff() <= 1.0);
  }
}

TEST_CASE("property: max-min kernel is invariant to rigid motions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = testing::random_points(20, 5, 100 + seed);
    const Eigen::MatrixXd q = testing::random_rotation(5, 200 + seed);
    const Eigen::RowVectorXd shift = testing::random_points(1, 5, 300 + seed, 10.0);
    const Eigen::MatrixXd y = (x * q).rowwise() + shift;
    CHECK((rbf_kernel_max_min(x).values - rbf_kernel_max_min(y).values).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("float instantiation") {
  const Eigen::MatrixXf x = testing::random_points(10, 3, 5).cast<float>();
  const auto k = rbf_kernel_max_min(x);
  CHECK(k.values.rows() == 10);
  CHECK(k.sigma2 > 0.0f);
}
