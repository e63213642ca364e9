#include <cmath>
#include <complex>
#include <numbers>

#include <doctest.h>

#include "seismap/features.hpp"
#include "support.hpp"

using namespace seismap;

namespace {

Waveform tone(double freq, Index n, double fs = 40.0) {
  Waveform w;
  w.fs = fs;
  w.samples.resize(n);
  for (Index i = 0; i < n; ++i) w.samples(i) = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return w;
}

}  // namespace

TEST_CASE("time-bin counts at 6000 and 5000 samples") {
  const StftParams p;
  CHECK(num_time_bins(6000, p) == 114);
  CHECK(num_time_bins(5000, p) == 94);
  CHECK(num_time_bins(256, p) == 1);
  CHECK_THROWS_AS(num_time_bins(255, p), SizeError);
}

TEST_CASE("sonovector of a 5000-sample window has 1034 entries") {
  const Waveform w = tone(3.0, 5000);
  const Sonovector v = waveform_sonovector(w, StftParams{});
  CHECK(v.x.size() == 1034);
}

TEST_CASE("stft column equals a direct DFT of the windowed frame") {
  const Eigen::VectorXd y = testing::random_vector(700, 21);
  StftParams p;
  p.window_len = 64;
  p.overlap = 0.75;
  const auto s = stft(y, p);
  CHECK(s.cols() == num_time_bins(700, p));
  const Eigen::VectorXd w = hann_window(64);
  for (Index t : {Index{0}, Index{5}, s.cols() - 1}) {
    const Index start = frame_offset(t, p);
    for (Index f = 0; f < 64; f += 7) {
      std::complex<double> acc = 0.0;
      for (Index i = 0; i < 64; ++i) {
        const double v = start + i < 700 ? w(i) * y(start + i) : 0.0;
        acc += v * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(f * i) / 64.0);
      }
      CHECK(std::abs(acc - s(f, t)) <= 1e-10);
    }
  }
}

TEST_CASE("spectrogram is |X|^2 / N0") {
  const Eigen::VectorXd y = testing::random_vector(512, 2);
  const auto s = stft(y, StftParams{});
  const Spectrogram sp = spectrogram(s, 40.0);
  for (Index t = 0; t < s.cols(); ++t)
    for (Index f = 0; f < s.rows(); ++f) CHECK(sp.values(f, t) == doctest::Approx(std::norm(s(f, t)) / 256.0));
}

TEST_CASE("band bins partition the one-sided spectrum") {
  const auto ranges = band_bin_ranges(BandTable::standard(), 256, 40.0);
  REQUIRE(ranges.size() == 11);
  CHECK(ranges.front().first == 0);
  CHECK(ranges.front().second == 1);
  for (std::size_t k = 1; k < ranges.size(); ++k) {
    CHECK(ranges[k].first == ranges[k - 1].second);
    CHECK(ranges[k].second > ranges[k].first);
  }
  CHECK(ranges.back().second == 129);
}

TEST_CASE("band table validation") {
  BandTable bt = BandTable::standard();
  CHECK_THROWS_AS(bt.validate(20.0), ConfigError);
  bt.bands[3].f_start = 0.1;
  CHECK_THROWS_AS(bt.validate(40.0), ConfigError);
}

TEST_CASE("sonogram rows sum to one and silent rows stay zero") {
  const Eigen::VectorXd y = testing::random_vector(5000, 5);
  Waveform w;
  w.samples = y;
  const Sonogram s = waveform_sonogram(w, StftParams{});
  CHECK(s.values.rows() == 11);
  CHECK(s.values.cols() == 94);
  for (Index k = 0; k < 11; ++k) CHECK(std::abs(s.values.row(k).sum() - 1.0) <= 1e-9);

  Spectrogram empty;
  empty.window_len = 256;
  empty.values = Eigen::MatrixXd::Zero(256, 4);
  CHECK(sonogram(empty).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("a 3 Hz tone lands in band 7") {
  const Waveform w = tone(3.0, 5000);
  const Spectrogram sp = spectrogram(stft(w.samples, StftParams{}), 40.0);
  const auto ranges = band_bin_ranges(BandTable::standard(), 256, 40.0);
  Eigen::VectorXd energy(11);
  for (std::size_t k = 0; k < 11; ++k)
    energy(static_cast<Index>(k)) =
        sp.values.middleRows(ranges[k].first, ranges[k].second - ranges[k].first).sum();
  Index dominant = 0;
  energy.maxCoeff(&dominant);
  CHECK(dominant + 1 == 7);
}

TEST_CASE("sonovector flattening is column-major and invertible") {
  Sonogram s;
  s.values.resize(11, 3);
  for (Index t = 0; t < 3; ++t)
    for (Index k = 0; k < 11; ++k) s.values(k, t) = static_cast<double>(100 * t + k);
  const Sonovector v = sonovector(s);
  for (Index t = 0; t < 3; ++t)
    for (Index k = 0; k < 11; ++k) CHECK(v.x(t * 11 + k) == s.values(k, t));
  CHECK(unflatten_sonovector(v.x, 11) == s.values);
  CHECK_THROWS_AS(unflatten_sonovector(v.x, 10), SizeError);
}

TEST_CASE("sonogram is invariant to amplitude scaling") {
  const Eigen::VectorXd y = testing::random_vector(2000, 8);
  Waveform a, b;
  a.samples = y;
  b.samples = 37.5 * y;
  const Sonogram sa = waveform_sonogram(a, StftParams{});
  const Sonogram sb = waveform_sonogram(b, StftParams{});
  CHECK((sa.values - sb.values).cwiseAbs().maxCoeff() <= 1e-12);
}
