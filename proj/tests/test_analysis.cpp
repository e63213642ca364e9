#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "seismap/analysis.hpp"
#include "support.hpp"

using namespace seismap;

namespace {

LabeledEmbedding two_clusters(Index per, double gap, std::uint64_t seed) {
  LabeledEmbedding e;
  e.coords = testing::random_points(2 * per, 2, seed, 0.1);
  for (Index i = 0; i < per; ++i) e.coords(per + i, 0) += gap;
  for (Index i = 0; i < 2 * per; ++i) e.labels.push_back(i < per ? "a" : "b");
  return e;
}

// Brute force: sort all distances, sum the K-1 smallest non-self entries.
Eigen::VectorXd knn_average_oracle(const Eigen::MatrixXd& x, Index k, double divisor) {
  Eigen::VectorXd out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> d;
    for (Index j = 0; j < x.rows(); ++j)
      if (j != i) d.push_back((x.row(i) - x.row(j)).squaredNorm());
    std::sort(d.begin(), d.end());
    double s = 0.0;
    for (Index r = 0; r < k - 1; ++r) s += d[static_cast<std::size_t>(r)];
    out(i) = s / divisor;
  }
  return out;
}

// 97 points on a small lattice inside the unit ball plus 3 distant points.
Eigen::MatrixXd lattice_with_outliers() {
  Eigen::MatrixXd x(100, 3);
  Index n = 0;
  for (int a = -3; a <= 3 && n < 97; ++a)
    for (int b = -3; b <= 3 && n < 97; ++b)
      for (int c = -3; c <= 3 && n < 97; ++c) {
        const Eigen::RowVector3d p(a, b, c);
        if (p.norm() <= 3.0) x.row(n++) = p / 3.0;
      }
  REQUIRE(n == 97);
  x.row(97) = Eigen::RowVector3d(50.0, 0.0, 0.0);
  x.row(98) = Eigen::RowVector3d(0.0, 50.0, 0.0);
  x.row(99) = Eigen::RowVector3d(0.0, 0.0, 50.0);
  return x;
}

}  // namespace

TEST_CASE("knn_classify majority vote and nearest-tie rule") {
  LabeledEmbedding e;
  e.coords.resize(4, 1);
  e.coords << 0.0, 1.0, 2.0, 10.0;
  e.labels = {"x", "y", "y", "x"};
  Eigen::VectorXd q(1);
  q << 0.1;
  CHECK(knn_classify(e, q, 1) == "x");
  CHECK(knn_classify(e, q, 3) == "y");
  // Two votes each: the nearest tied label wins.
  CHECK(knn_classify(e, q, 4) == "x");
  CHECK_THROWS_AS(knn_classify(e, q, 5), ConfigError);
  CHECK_THROWS_AS(knn_classify(e, Eigen::VectorXd::Zero(2), 1), SizeError);
}

TEST_CASE("property: knn_classify is invariant to rigid motions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    LabeledEmbedding e;
    e.coords = testing::random_points(30, 3, seed);
    for (Index i = 0; i < 30; ++i) e.labels.push_back(e.coords(i, 0) + 0.3 * e.coords(i, 2) > 0 ? "p" : "n");
    const Eigen::MatrixXd q = testing::random_rotation(3, 50 + seed);
    const Eigen::RowVectorXd shift = testing::random_points(1, 3, 70 + seed, 5.0);
    LabeledEmbedding moved = e;
    moved.coords = (e.coords * q).rowwise() + shift;
    const Eigen::MatrixXd queries = testing::random_points(10, 3, 90 + seed);
    for (Index r = 0; r < 10; ++r)
      for (Index k : {1, 3, 5}) {
        const Eigen::RowVectorXd mq = queries.row(r) * q + shift;
        CHECK(knn_classify(e, queries.row(r), k) == knn_classify(moved, mq, k));
      }
  }
}

TEST_CASE("leave-one-out accuracy") {
  const LabeledEmbedding sep = two_clusters(20, 5.0, 1);
  for (Index k : {1, 3, 7}) CHECK(leave_one_out_accuracy(sep, k) == 1.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    LabeledEmbedding mixed = two_clusters(15, 0.05, seed);
    const auto curve = leave_one_out_curve(mixed, {1, 2, 3, 5, 9});
    for (double a : curve) CHECK((a >= 0.0 && a <= 1.0));
  }
  CHECK_THROWS_AS(leave_one_out_accuracy(sep, 40), ConfigError);
}

TEST_CASE("leave-one-out against a brute-force loop") {
  LabeledEmbedding e = two_clusters(12, 0.2, 3);
  for (Index k : {1, 3, 5}) {
    Index correct = 0;
    for (Index i = 0; i < e.size(); ++i) {
      LabeledEmbedding train;
      train.coords.resize(e.size() - 1, 2);
      Index r = 0;
      for (Index j = 0; j < e.size(); ++j)
        if (j != i) {
          train.coords.row(r++) = e.coords.row(j);
          train.labels.push_back(e.labels[static_cast<std::size_t>(j)]);
        }
      if (knn_classify(train, e.coords.row(i), k) == e.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    CHECK(leave_one_out_accuracy(e, k) == doctest::Approx(static_cast<double>(correct) / 24.0));
  }
}

TEST_CASE("balanced_resample draws the requested ratio") {
  std::vector<std::string> labels;
  for (int i = 0; i < 30; ++i) labels.push_back("eq");
  for (int i = 0; i < 100; ++i) labels.push_back("ex");
  const auto subsets = balanced_resample(labels, 2, 15, 42);
  CHECK(subsets.size() == 15);
  for (const auto& s : subsets) {
    CHECK(s.size() == 90);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::set<Index>(s.begin(), s.end()).size() == s.size());
    const auto eq = std::count_if(s.begin(), s.end(), [](Index i) { return i < 30; });
    CHECK(eq == 30);
  }
  CHECK(balanced_resample(labels, 2, 15, 42) == subsets);
  CHECK(balanced_resample(labels, 2, 15, 43) != subsets);
}

TEST_CASE("balanced_resample with a short majority subsamples the minority") {
  std::vector<std::string> labels;
  for (int i = 0; i < 30; ++i) labels.push_back("a");
  for (int i = 0; i < 50; ++i) labels.push_back("b");
  for (const auto& s : balanced_resample(labels, 2, 5, 1)) {
    const auto a = std::count_if(s.begin(), s.end(), [](Index i) { return i < 30; });
    CHECK(a == 25);
    CHECK(s.size() == 75);
  }
  std::vector<std::string> equal(10, "a");
  for (int i = 0; i < 10; ++i) equal.push_back("b");
  const auto full = balanced_resample(equal, 1, 3, 0);
  for (const auto& s : full) CHECK(s.size() == 20);
  CHECK_THROWS_AS(balanced_resample(std::vector<std::string>(5, "a"), 2, 1, 0), ConfigError);
}

TEST_CASE("detect_anomalies matches the brute-force average") {
  const Eigen::MatrixXd x = testing::random_points(40, 3, 5);
  for (Index k : {2, 4, 6}) {
    const AnomalyReport r = detect_anomalies(x, k);
    CHECK((r.avg_knn_distance - knn_average_oracle(x, k, static_cast<double>(k))).cwiseAbs().maxCoeff() <= 1e-12);
    const AnomalyReport r1 = detect_anomalies(x, k, 4.0, KnnAverage::DivideByKMinusOne);
    CHECK((r1.avg_knn_distance - knn_average_oracle(x, k, static_cast<double>(k - 1))).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("detect_anomalies: 97 clustered points and 3 far points") {
  const AnomalyReport r = detect_anomalies(lattice_with_outliers(), 4, 4.0);
  CHECK(r.flagged.size() == 3);
  CHECK(std::set<Index>(r.flagged.begin(), r.flagged.end()) == std::set<Index>{97, 98, 99});
  for (std::size_t i = 1; i < r.flagged.size(); ++i)
    CHECK(r.avg_knn_distance(r.flagged[i - 1]) >= r.avg_knn_distance(r.flagged[i]));
  // Flag set is exactly the strict exceedances.
  for (Index i = 0; i < 100; ++i)
    CHECK((r.avg_knn_distance(i) > r.threshold) ==
          (std::find(r.flagged.begin(), r.flagged.end(), i) != r.flagged.end()));
}

TEST_CASE("detect_anomalies: identical points flag nothing") {
  const AnomalyReport r = detect_anomalies(Eigen::MatrixXd::Constant(10, 3, 2.5), 4);
  CHECK(r.flagged.empty());
  CHECK(r.threshold == 0.0);
}

TEST_CASE("property: flag set is invariant to global scaling") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x = testing::random_points(60, 3, seed).array().cube().matrix();
    const AnomalyReport a = detect_anomalies(x, 4);
    const AnomalyReport b = detect_anomalies((10.0 * x).eval(), 4);
    CHECK(a.flagged == b.flagged);
  }
}

TEST_CASE("detect_anomalies argument checks") {
  const Eigen::MatrixXd x = testing::random_points(5, 2, 1);
  CHECK_THROWS_AS(detect_anomalies(x, 1), ConfigError);
  CHECK_THROWS_AS(detect_anomalies(x, 5), ConfigError);
  CHECK_THROWS_AS(detect_anomalies(x, 2, 0.0), ConfigError);
}

TEST_CASE("median") {
  Eigen::VectorXd odd(5), even(4);
  odd << 5, 1, 4, 2, 3;
  even << 4, 1, 3, 2;
  CHECK(median(odd) == 3.0);
  CHECK(median(even) == 2.5);
  CHECK_THROWS_AS(median(Eigen::VectorXd()), SizeError);
}

TEST_CASE("pearson against the textbook formula") {
  const Eigen::VectorXd x = testing::random_vector(50, 1);
  const Eigen::VectorXd y = 0.5 * x + testing::random_vector(50, 2);
  const double mx = x.mean(), my = y.mean();
  double sxy = 0, sxx = 0, syy = 0;
  for (Index i = 0; i < 50; ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
    syy += (y(i) - my) * (y(i) - my);
  }
  CHECK(pearson(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-13));
  CHECK(pearson(x, x) == doctest::Approx(1.0));
  CHECK(pearson(x, (-x).eval()) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(x, Eigen::VectorXd::Ones(50).eval()), UndefinedCorrelationError);
  CHECK_THROWS_AS(pearson(x, y.head(10).eval()), SizeError);
}

TEST_CASE("property: pearson is invariant to positive affine maps") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd x = testing::random_vector(30, seed);
    const Eigen::VectorXd y = testing::random_vector(30, seed + 100) + x;
    const double a = 0.1 + static_cast<double>(seed), b = -3.0 + static_cast<double>(seed);
    CHECK(pearson((a * x.array() + b).matrix().eval(), y) == doctest::Approx(pearson(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("location_correlation picks the better coordinate pairing") {
  const Eigen::VectorXd lat = testing::random_vector(40, 3);
  const Eigen::VectorXd lon = testing::random_vector(40, 4);
  Eigen::MatrixXd coords(40, 2);
  coords.col(0) = -2.0 * lon;
  coords.col(1) = lat + 0.01 * testing::random_vector(40, 5);
  const LocationEval r = location_correlation(coords, lat, lon, "DM");
  CHECK(r.swapped);
  CHECK(r.pearson_lon == doctest::Approx(1.0));
  CHECK(r.pearson_lat > 0.99);
  CHECK(r.method == "DM");
  CHECK_THROWS_AS(location_correlation(coords.leftCols(1), lat, lon, "x"), ConfigError);
}
