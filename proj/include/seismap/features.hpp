#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "seismap/errors.hpp"
#include "seismap/signal.hpp"

namespace seismap {

enum class WindowFn { Hann };

struct StftParams {
  Index window_len{256};
  double overlap{0.8};
  WindowFn window{WindowFn::Hann};

  double hop() const { return (1.0 - overlap) * static_cast<double>(window_len); }

  void validate() const {
    if (window_len < 2) throw ConfigError("STFT window must have at least two samples");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("STFT overlap must lie in [0, 1)");
    if (!(hop() > 0.0)) throw ConfigError("STFT hop must be positive");
  }
};

/// Number of STFT columns: ceil((N - N0) / ((1 - s) N0)) + 1.
inline Index num_time_bins(Index n, const StftParams& p) {
  p.validate();
  if (n < p.window_len)
    throw SizeError("signal of " + std::to_string(n) + " samples is shorter than one STFT window (" +
                    std::to_string(p.window_len) + ")");
  const double ratio = static_cast<double>(n - p.window_len) / p.hop();
  // Absorb representation error in hops like 0.2 * 256.
  return static_cast<Index>(std::ceil(ratio - 1e-9)) + 1;
}

/// Start sample of column t (0-based); the fractional hop is rounded.
inline Index frame_offset(Index t, const StftParams& p) {
  return static_cast<Index>(std::llround(p.hop() * static_cast<double>(t)));
}

template <typename Scalar = double>
VectorX<Scalar> hann_window(Index n) {
  VectorX<Scalar> w(n);
  for (Index i = 0; i < n; ++i)
    w(i) = static_cast<Scalar>(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                    static_cast<double>(n - 1)));
  return w;
}

/// Windowed DFT per column, F = N0 rows (full two-sided spectrum). Frames
/// running past the end of the signal are zero-padded.
template <typename Derived>
Eigen::Matrix<std::complex<typename Derived::Scalar>, Eigen::Dynamic, Eigen::Dynamic> stft(
    const Eigen::MatrixBase<Derived>& y, const StftParams& p) {
  using Scalar = typename Derived::Scalar;
  const Index n = y.size();
  const Index t_bins = num_time_bins(n, p);
  const Index n0 = p.window_len;
  const VectorX<Scalar> window = hann_window<Scalar>(n0);

  Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> out(n0, t_bins);
  Eigen::FFT<Scalar> fft;
  std::vector<Scalar> frame(static_cast<std::size_t>(n0));
  std::vector<std::complex<Scalar>> spectrum;
  for (Index t = 0; t < t_bins; ++t) {
    const Index start = frame_offset(t, p);
    for (Index i = 0; i < n0; ++i) {
      const Index src = start + i;
      frame[static_cast<std::size_t>(i)] = src < n ? window(i) * y(src) : Scalar{0};
    }
    fft.fwd(spectrum, frame);
    for (Index f = 0; f < n0; ++f) out(f, t) = spectrum[static_cast<std::size_t>(f)];
  }
  return out;
}

template <typename Scalar>
struct BasicSpectrogram {
  MatrixX<Scalar> values;  // F x T energies
  Index window_len{256};
  double fs{40.0};

  Index freq_bins() const { return values.rows(); }
  Index time_bins() const { return values.cols(); }
  double bin_spacing() const { return fs / static_cast<double>(window_len); }
};

using Spectrogram = BasicSpectrogram<double>;

/// |STFT|^2 / N0, element-wise.
template <typename Derived>
BasicSpectrogram<typename Derived::RealScalar> spectrogram(const Eigen::MatrixBase<Derived>& stft_out, double fs) {
  using Real = typename Derived::RealScalar;
  BasicSpectrogram<Real> s;
  s.window_len = stft_out.rows();
  s.fs = fs;
  s.values = stft_out.cwiseAbs2() / static_cast<Real>(stft_out.rows());
  return s;
}

struct FrequencyBand {
  double f_start{0.0};
  double f_end{0.0};
};

/// Logarithmically spaced band edges used for the sonogram.
struct BandTable {
  std::vector<FrequencyBand> bands;

  static BandTable standard() {
    return BandTable{{{0.0, 0.0},
                      {0.157, 0.315},
                      {0.315, 0.630},
                      {0.630, 1.102},
                      {1.102, 1.889},
                      {1.889, 2.992},
                      {2.992, 4.567},
                      {4.567, 6.772},
                      {6.772, 9.921},
                      {9.921, 14.331},
                      {14.331, 20.0}}};
  }

  Index size() const { return static_cast<Index>(bands.size()); }

  void validate(double fs) const {
    if (bands.empty()) throw ConfigError("band table is empty");
    for (std::size_t k = 0; k < bands.size(); ++k) {
      const auto& b = bands[k];
      if (b.f_start < 0.0 || b.f_end < b.f_start) throw ConfigError("band table rows must satisfy 0 <= f_start <= f_end");
      if (k > 0 && b.f_start < bands[k - 1].f_end - 1e-12)
        throw ConfigError("band table rows must be ascending and non-overlapping");
    }
    if (bands.back().f_end > fs / 2.0 + 1e-9)
      throw ConfigError("band table extends to " + std::to_string(bands.back().f_end) +
                        " Hz, above the Nyquist frequency " + std::to_string(fs / 2.0) + " Hz");
  }
};

/// DFT-bin ranges [begin, end) for each band. Edges are snapped to the
/// nearest bin so that consecutive bands partition the one-sided spectrum;
/// a zero-width band holds the single bin at its frequency, and a band that
/// reaches the Nyquist frequency keeps the Nyquist bin.
inline std::vector<std::pair<Index, Index>> band_bin_ranges(const BandTable& bt, Index window_len, double fs) {
  bt.validate(fs);
  const double spacing = fs / static_cast<double>(window_len);
  const Index nyquist_bin = window_len / 2;
  auto snap = [&](double f) { return static_cast<Index>(std::llround(f / spacing)); };

  std::vector<std::pair<Index, Index>> ranges;
  Index previous_end = 0;
  for (const auto& b : bt.bands) {
    Index begin = std::max(snap(b.f_start), previous_end);
    Index end;
    if (b.f_end == b.f_start) {
      end = begin + 1;
    } else if (b.f_end >= fs / 2.0 - 1e-9) {
      end = nyquist_bin + 1;
    } else {
      end = std::min(snap(b.f_end), nyquist_bin + 1);
    }
    if (end <= begin)
      throw ConfigError("band " + std::to_string(b.f_start) + ".." + std::to_string(b.f_end) +
                        " Hz is narrower than the DFT bin spacing");
    ranges.emplace_back(begin, end);
    previous_end = end;
  }
  return ranges;
}

template <typename Scalar>
struct BasicSonogram {
  MatrixX<Scalar> values;  // bands x T
  BandTable band_table;
};

using Sonogram = BasicSonogram<double>;

/// Sum spectrogram rows into bands, then scale each band row to unit sum.
/// Rows without energy stay zero.
template <typename Scalar>
BasicSonogram<Scalar> sonogram(const BasicSpectrogram<Scalar>& spec, const BandTable& bt = BandTable::standard()) {
  const auto ranges = band_bin_ranges(bt, spec.window_len, spec.fs);
  BasicSonogram<Scalar> out;
  out.band_table = bt;
  out.values = MatrixX<Scalar>::Zero(bt.size(), spec.time_bins());
  for (Index k = 0; k < bt.size(); ++k) {
    const auto [begin, end] = ranges[static_cast<std::size_t>(k)];
    out.values.row(k) = spec.values.middleRows(begin, end - begin).colwise().sum();
    const Scalar total = out.values.row(k).sum();
    if (total > Scalar{0}) out.values.row(k) /= total;
  }
  return out;
}

template <typename Scalar>
struct BasicSonovector {
  VectorX<Scalar> x;
  std::string event_id;
  Channel channel{Channel::Z};
};

using Sonovector = BasicSonovector<double>;

/// Column-major flattening: x[t * bands + k] = S(k, t).
template <typename Scalar>
BasicSonovector<Scalar> sonovector(const BasicSonogram<Scalar>& s) {
  BasicSonovector<Scalar> v;
  v.x = Eigen::Map<const VectorX<Scalar>>(s.values.data(), s.values.size());
  return v;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> unflatten_sonovector(const Eigen::MatrixBase<Derived>& x, Index bands) {
  if (bands <= 0 || x.size() % bands != 0)
    throw SizeError("sonovector length " + std::to_string(x.size()) + " is not a multiple of " +
                    std::to_string(bands));
  const auto flat = x.eval();
  return Eigen::Map<const MatrixX<typename Derived::Scalar>>(flat.data(), bands, x.size() / bands);
}

template <typename Scalar>
BasicSonogram<Scalar> waveform_sonogram(const BasicWaveform<Scalar>& w, const StftParams& p,
                                        const BandTable& bt = BandTable::standard()) {
  return sonogram(spectrogram(stft(w.samples, p), static_cast<double>(w.fs)), bt);
}

template <typename Scalar>
BasicSonovector<Scalar> waveform_sonovector(const BasicWaveform<Scalar>& w, const StftParams& p,
                                            const BandTable& bt = BandTable::standard()) {
  BasicSonovector<Scalar> v = sonovector(waveform_sonogram(w, p, bt));
  v.event_id = w.event_id;
  v.channel = w.channel;
  return v;
}

}  // namespace seismap
