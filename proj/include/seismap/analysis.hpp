#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "seismap/errors.hpp"
#include "seismap/kernels.hpp"

namespace seismap {

template <typename Scalar>
struct BasicLabeledEmbedding {
  MatrixX<Scalar> coords;
  std::vector<std::string> labels;
  std::vector<std::string> event_ids;

  Index size() const { return coords.rows(); }
};

using LabeledEmbedding = BasicLabeledEmbedding<double>;

namespace detail {

// Majority label among the first k entries of `ranked` (ascending distance);
// a tie goes to the tied label whose member ranks first.
inline const std::string& vote(const std::vector<Index>& ranked, const std::vector<std::string>& labels, Index k) {
  std::map<std::string, Index> counts;
  for (Index r = 0; r < k; ++r) ++counts[labels[static_cast<std::size_t>(ranked[static_cast<std::size_t>(r)])]];
  Index best = 0;
  for (const auto& [label, n] : counts) best = std::max(best, n);
  for (Index r = 0; r < k; ++r) {
    const std::string& label = labels[static_cast<std::size_t>(ranked[static_cast<std::size_t>(r)])];
    if (counts[label] == best) return label;
  }
  return labels[static_cast<std::size_t>(ranked.front())];
}

template <typename Derived>
std::vector<Index> rank_by_distance(const Eigen::MatrixBase<Derived>& dist, Index exclude = -1) {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(dist.size()));
  for (Index i = 0; i < dist.size(); ++i)
    if (i != exclude) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return dist(a) < dist(b); });
  return order;
}

}  // namespace detail

/// K-NN vote in Euclidean embedding coordinates; ties go to the label of
/// the nearest tied neighbour.
template <typename Scalar, typename Derived>
std::string knn_classify(const BasicLabeledEmbedding<Scalar>& train, const Eigen::MatrixBase<Derived>& query, Index k) {
  if (train.size() == 0) throw ConfigError("K-NN training set is empty");
  if (k < 1 || k > train.size()) throw ConfigError("K must lie in [1, training size]");
  if (query.size() != train.coords.cols()) throw SizeError("query dimension does not match the embedding");
  const VectorX<Scalar> dist =
      (train.coords.rowwise() - query.derived().reshaped().transpose().template cast<Scalar>()).rowwise().squaredNorm();
  return detail::vote(detail::rank_by_distance(dist), train.labels, k);
}

/// Leave-one-out accuracy for each K in `ks`, sharing one neighbour ranking.
template <typename Scalar>
std::vector<double> leave_one_out_curve(const BasicLabeledEmbedding<Scalar>& emb, const std::vector<Index>& ks) {
  const Index m = emb.size();
  if (m < 2) throw SizeError("leave-one-out needs at least two points");
  if (static_cast<Index>(emb.labels.size()) != m) throw SizeError("labels are not aligned with the embedding");
  for (Index k : ks)
    if (k < 1 || k > m - 1) throw ConfigError("K must lie in [1, M - 1] for leave-one-out");
  const MatrixX<Scalar> d2 = squared_distances(emb.coords);
  std::vector<Index> correct(ks.size(), 0);
  for (Index i = 0; i < m; ++i) {
    const std::vector<Index> ranked = detail::rank_by_distance(d2.col(i), i);
    for (std::size_t q = 0; q < ks.size(); ++q)
      if (detail::vote(ranked, emb.labels, ks[q]) == emb.labels[static_cast<std::size_t>(i)]) ++correct[q];
  }
  std::vector<double> acc;
  for (Index c : correct) acc.push_back(static_cast<double>(c) / static_cast<double>(m));
  return acc;
}

template <typename Scalar>
double leave_one_out_accuracy(const BasicLabeledEmbedding<Scalar>& emb, Index k) {
  return leave_one_out_curve(emb, std::vector<Index>{k}).front();
}

/// Class-balanced subsets: every trial keeps the minority class and draws
/// multiple x (minority count) majority points without replacement. When the
/// majority class is too small for that, all of it is kept and the minority
/// is drawn down to floor(majority / multiple) instead, so the ratio holds.
/// Indices in each subset are sorted.
inline std::vector<std::vector<Index>> balanced_resample(const std::vector<std::string>& labels, Index multiple,
                                                         Index trials, std::uint64_t seed) {
  if (multiple < 1 || trials < 1) throw ConfigError("resampling multiple and trial count must be positive");
  std::map<std::string, std::vector<Index>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(static_cast<Index>(i));
  if (groups.size() != 2) throw ConfigError("balanced resampling expects exactly two classes");
  auto minority = groups.begin();
  auto majority = std::next(groups.begin());
  if (majority->second.size() < minority->second.size()) std::swap(minority, majority);
  const std::size_t m = static_cast<std::size_t>(multiple);
  std::size_t keep = minority->second.size();
  if (m * keep > majority->second.size()) keep = majority->second.size() / m;
  if (keep == 0) throw ConfigError("too few majority-class events for the requested resampling multiple");
  const std::size_t draw = m * keep;

  // Partial Fisher-Yates: the first n entries become a uniform sample.
  auto sample = [](std::vector<Index> pool, std::size_t n, std::mt19937_64& rng) {
    for (std::size_t i = 0; i < n && i + 1 < pool.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(n);
    return pool;
  };

  std::vector<std::vector<Index>> subsets;
  std::mt19937_64 master(seed);
  for (Index t = 0; t < trials; ++t) {
    std::mt19937_64 rng(master());
    std::vector<Index> subset = sample(minority->second, keep, rng);
    const std::vector<Index> drawn = sample(majority->second, draw, rng);
    subset.insert(subset.end(), drawn.begin(), drawn.end());
    std::sort(subset.begin(), subset.end());
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

template <typename Scalar>
struct BasicAnomalyReport {
  VectorX<Scalar> avg_knn_distance;
  std::vector<Index> flagged;  // descending by average distance
  Scalar threshold{0};
  Index k{0};
};

using AnomalyReport = BasicAnomalyReport<double>;

enum class KnnAverage { DivideByK, DivideByKMinusOne };

template <typename Derived>
typename Derived::Scalar median(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> copy = v.derived().reshaped();
  std::vector<Scalar> values(copy.data(), copy.data() + copy.size());
  if (values.empty()) throw SizeError("median of an empty vector");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const Scalar upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const Scalar lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return Scalar{0.5} * (lower + upper);
}

/// K-NN average-distance screening. For each point the squared distances to
/// its K-1 nearest other points are summed and divided by K (or K-1); points
/// above threshold_multiple x median are flagged.
template <typename Derived>
BasicAnomalyReport<typename Derived::Scalar> detect_anomalies(const Eigen::MatrixBase<Derived>& coords, Index k,
                                                              double threshold_multiple = 4.0,
                                                              KnnAverage average = KnnAverage::DivideByK) {
  using Scalar = typename Derived::Scalar;
  const Index m = coords.rows();
  if (k < 2) throw ConfigError("anomaly detection needs K >= 2");
  if (m <= k) throw ConfigError("anomaly detection needs more points than K");
  if (!(threshold_multiple > 0.0)) throw ConfigError("threshold multiple must be positive");

  const MatrixX<Scalar> d2 = squared_distances(coords);
  BasicAnomalyReport<Scalar> report;
  report.k = k;
  report.avg_knn_distance.resize(m);
  const Scalar divisor = static_cast<Scalar>(average == KnnAverage::DivideByK ? k : k - 1);
  for (Index i = 0; i < m; ++i) {
    const std::vector<Index> ranked = detail::rank_by_distance(d2.col(i), i);
    Scalar sum{0};
    for (Index r = 0; r < k - 1; ++r) sum += d2(ranked[static_cast<std::size_t>(r)], i);
    report.avg_knn_distance(i) = sum / divisor;
  }
  report.threshold = static_cast<Scalar>(threshold_multiple) * median(report.avg_knn_distance);
  for (Index i = 0; i < m; ++i)
    if (report.avg_knn_distance(i) > report.threshold) report.flagged.push_back(i);
  std::stable_sort(report.flagged.begin(), report.flagged.end(), [&](Index a, Index b) {
    return report.avg_knn_distance(a) > report.avg_knn_distance(b);
  });
  return report;
}

/// Product-moment correlation.
template <typename DerivedX, typename DerivedY>
double pearson(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y) {
  if (x.size() != y.size()) throw SizeError("correlation inputs differ in length");
  if (x.size() < 2) throw SizeError("correlation needs at least two samples");
  const Eigen::ArrayXd xa = x.derived().reshaped().template cast<double>().array();
  const Eigen::ArrayXd ya = y.derived().reshaped().template cast<double>().array();
  const Eigen::ArrayXd xc = xa - xa.mean();
  const Eigen::ArrayXd yc = ya - ya.mean();
  const double sxx = xc.square().sum();
  const double syy = yc.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedCorrelationError("correlation undefined for a constant input");
  return std::clamp((xc * yc).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct LocationEval {
  double pearson_lat{0.0};
  double pearson_lon{0.0};
  std::string method;
  bool swapped{false};  // true when coordinate 2 was paired with latitude
};

/// Absolute correlations of the first two coordinates with latitude and
/// longitude; the coordinate-to-axis pairing with the larger total is kept.
template <typename Derived>
LocationEval location_correlation(const Eigen::MatrixBase<Derived>& coords, const Eigen::VectorXd& lat,
                                  const Eigen::VectorXd& lon, std::string method) {
  if (coords.cols() < 2) throw ConfigError("location evaluation needs at least two coordinates");
  if (coords.rows() != lat.size() || coords.rows() != lon.size())
    throw SizeError("coordinates and catalog locations are not aligned");
  const double c1_lat = std::abs(pearson(coords.col(0), lat));
  const double c2_lon = std::abs(pearson(coords.col(1), lon));
  const double c2_lat = std::abs(pearson(coords.col(1), lat));
  const double c1_lon = std::abs(pearson(coords.col(0), lon));
  LocationEval out;
  out.method = std::move(method);
  if (c2_lat + c1_lon > c1_lat + c2_lon) {
    out.pearson_lat = c2_lat;
    out.pearson_lon = c1_lon;
    out.swapped = true;
  } else {
    out.pearson_lat = c1_lat;
    out.pearson_lon = c2_lon;
  }
  return out;
}

}  // namespace seismap
