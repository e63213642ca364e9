#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "seismap/errors.hpp"

namespace seismap {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Channel { E, N, Z };

inline constexpr std::array<Channel, 3> kChannels{Channel::E, Channel::N, Channel::Z};

inline char channel_name(Channel c) {
  switch (c) {
    case Channel::E: return 'E';
    case Channel::N: return 'N';
    case Channel::Z: return 'Z';
  }
  return '?';
}

inline Channel parse_channel(const std::string& s) {
  if (s == "E" || s == "e") return Channel::E;
  if (s == "N" || s == "n") return Channel::N;
  if (s == "Z" || s == "z") return Channel::Z;
  throw ConfigError("unknown channel '" + s + "' (expected E, N or Z)");
}

inline std::size_t channel_slot(Channel c) { return static_cast<std::size_t>(c); }

/// One channel of a raw seismogram.
template <typename Scalar>
struct BasicWaveform {
  VectorX<Scalar> samples;
  Scalar fs{40};
  Channel channel{Channel::Z};
  std::string event_id;

  Index size() const { return samples.size(); }
};

using Waveform = BasicWaveform<double>;

struct BandPassSpec {
  double f_low{2.0};
  double f_high{4.0};
  Index num_taps{129};
};

/// Which sample a threshold crossing of R(n) is attributed to. R(n) looks
/// forward from n, so the first window to contain the arrival starts up to
/// one short window before it.
enum class OnsetLabel { WindowStart, ShortWindowEnd };

struct StaLtaParams {
  Index short_window{40};
  Index long_window{1200};
  double threshold_cap{4.0};
  double threshold_frac{0.3};
  OnsetLabel label{OnsetLabel::ShortWindowEnd};

  void validate() const {
    if (short_window < 1) throw ConfigError("STA window must be at least one sample");
    if (long_window <= short_window)
      throw ConfigError("LTA window must be longer than the STA window");
    if (!(threshold_frac > 0.0) || !(threshold_cap > 0.0))
      throw ConfigError("trigger threshold constants must be positive");
  }
};

struct TriggerResult {
  Index onset_index{0};
  /// Raw first index with R(n) > delta, per band.
  std::array<std::optional<Index>, 3> per_band_crossings;
  /// Crossings mapped to sample indices according to `OnsetLabel`.
  std::array<std::optional<Index>, 3> per_band_onsets;
  std::array<double, 3> thresholds{};
  std::array<VectorX<double>, 3> ratios;
};

inline std::array<BandPassSpec, 3> default_trigger_bands() {
  return {BandPassSpec{2.0, 4.0, 129}, BandPassSpec{4.0, 8.0, 129}, BandPassSpec{8.0, 12.0, 129}};
}

inline void validate_band(const BandPassSpec& spec, double fs) {
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (!(spec.f_low > 0.0) || !(spec.f_high > spec.f_low) || !(spec.f_high < fs / 2.0))
    throw ConfigError("band edges must satisfy 0 < f_low < f_high < fs/2 (got " +
                      std::to_string(spec.f_low) + ".." + std::to_string(spec.f_high) +
                      " Hz at fs=" + std::to_string(fs) + ")");
  if (spec.num_taps < 3 || spec.num_taps % 2 == 0)
    throw ConfigError("FIR length must be odd and at least 3");
}

namespace detail {

inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Hamming-windowed low-pass with unit DC gain.
template <typename Scalar>
VectorX<Scalar> windowed_lowpass(Index taps, double cutoff_norm) {
  VectorX<Scalar> h(taps);
  const double centre = 0.5 * static_cast<double>(taps - 1);
  double sum = 0.0;
  for (Index n = 0; n < taps; ++n) {
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(taps - 1));
    const double v = window * 2.0 * cutoff_norm * sinc(2.0 * cutoff_norm * (static_cast<double>(n) - centre));
    h(n) = static_cast<Scalar>(v);
    sum += v;
  }
  h /= static_cast<Scalar>(sum);
  return h;
}

}  // namespace detail

/// Magnitude of the FIR frequency response at `freq` (Hz).
template <typename Derived>
double fir_gain(const Eigen::MatrixBase<Derived>& taps, double freq, double fs) {
  double re = 0.0, im = 0.0;
  for (Index n = 0; n < taps.size(); ++n) {
    const double phase = -2.0 * std::numbers::pi * freq * static_cast<double>(n) / fs;
    re += static_cast<double>(taps(n)) * std::cos(phase);
    im += static_cast<double>(taps(n)) * std::sin(phase);
  }
  return std::hypot(re, im);
}

/// Linear-phase windowed-sinc band-pass (Hamming window). Built as the
/// difference of two unit-DC-gain low-passes, so DC is rejected exactly,
/// then scaled to unit gain at the band centre.
template <typename Scalar = double>
VectorX<Scalar> design_bandpass(const BandPassSpec& spec, double fs) {
  validate_band(spec, fs);
  VectorX<Scalar> h = detail::windowed_lowpass<Scalar>(spec.num_taps, spec.f_high / fs) -
                      detail::windowed_lowpass<Scalar>(spec.num_taps, spec.f_low / fs);
  const double centre_gain = fir_gain(h, 0.5 * (spec.f_low + spec.f_high), fs);
  if (!(centre_gain > 0.0)) throw NumericError("band-pass design has zero gain at the band centre");
  h /= static_cast<Scalar>(centre_gain);
  return h;
}

/// Zero-phase application of a symmetric FIR: the (taps-1)/2 group delay is
/// compensated and samples outside the signal are treated as zero, so the
/// output has the input's length.
template <typename DerivedX, typename DerivedH>
VectorX<typename DerivedX::Scalar> fir_filter_centered(const Eigen::MatrixBase<DerivedX>& x,
                                                       const Eigen::MatrixBase<DerivedH>& taps) {
  using Scalar = typename DerivedX::Scalar;
  const Index n = x.size();
  const Index k = taps.size();
  const Index delay = (k - 1) / 2;
  VectorX<Scalar> y = VectorX<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    // y[i] = sum_j h[j] x[i + delay - j]
    const Index j_lo = std::max<Index>(0, i + delay - (n - 1));
    const Index j_hi = std::min<Index>(k - 1, i + delay);
    Scalar acc{0};
    for (Index j = j_lo; j <= j_hi; ++j) acc += static_cast<Scalar>(taps(j)) * x(i + delay - j);
    y(i) = acc;
  }
  return y;
}

template <typename Scalar>
BasicWaveform<Scalar> bandpass_filter(const BasicWaveform<Scalar>& w, const BandPassSpec& spec) {
  const VectorX<Scalar> h = design_bandpass<Scalar>(spec, static_cast<double>(w.fs));
  BasicWaveform<Scalar> out = w;
  out.samples = fir_filter_centered(w.samples, h);
  return out;
}

/// STA/LTA ratio with both windows starting at i and looking forward:
///   R(i) = L * sum_{[i, i+S)} y^2 / (S * sum_{[i, i+L)} y^2)
/// for every i with i + L <= N. A silent long window gives R = 0.
template <typename Derived>
VectorX<typename Derived::Scalar> sta_lta_ratio(const Eigen::MatrixBase<Derived>& y, const StaLtaParams& p) {
  using Scalar = typename Derived::Scalar;
  p.validate();
  const Index n = y.size();
  const Index s = p.short_window;
  const Index l = p.long_window;
  if (n < l + 1)
    throw SizeError("signal of " + std::to_string(n) + " samples is shorter than the LTA window plus one (" +
                    std::to_string(l + 1) + ")");

  std::vector<long double> prefix(static_cast<std::size_t>(n) + 1, 0.0L);
  for (Index i = 0; i < n; ++i) {
    const long double v = static_cast<long double>(y(i));
    prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + v * v;
  }
  auto window_sum = [&](Index from, Index len) {
    return prefix[static_cast<std::size_t>(from + len)] - prefix[static_cast<std::size_t>(from)];
  };

  const Index count = n - l + 1;
  VectorX<Scalar> r(count);
  for (Index i = 0; i < count; ++i) {
    const long double lta = window_sum(i, l);
    if (lta <= 0.0L) {
      r(i) = Scalar{0};
      continue;
    }
    const long double sta = window_sum(i, s);
    r(i) = static_cast<Scalar>((static_cast<long double>(l) * sta) / (static_cast<long double>(s) * lta));
  }
  return r;
}

template <typename Scalar>
VectorX<Scalar> sta_lta_ratio(const BasicWaveform<Scalar>& w, const StaLtaParams& p) {
  return sta_lta_ratio(w.samples, p);
}

inline double trigger_threshold(double max_ratio, const StaLtaParams& p) {
  return std::min(p.threshold_cap, p.threshold_frac * max_ratio);
}

/// First index with R(n) strictly above `delta`.
template <typename Derived>
std::optional<Index> first_crossing(const Eigen::MatrixBase<Derived>& r, double delta) {
  for (Index i = 0; i < r.size(); ++i)
    if (static_cast<double>(r(i)) > delta) return i;
  return std::nullopt;
}

inline Index minimum_alignment_length(const StaLtaParams& p, const std::array<BandPassSpec, 3>& bands) {
  Index longest = 0;
  for (const auto& b : bands) longest = std::max(longest, b.num_taps);
  return 2 * (longest + p.long_window);
}

/// Multi-band STA/LTA onset picker: filter into each band, threshold each
/// ratio at min(cap, frac * max R) and keep the earliest crossing.
template <typename Scalar>
TriggerResult align_trigger(const BasicWaveform<Scalar>& w, const StaLtaParams& p,
                            const std::array<BandPassSpec, 3>& bands = default_trigger_bands()) {
  p.validate();
  const Index needed = minimum_alignment_length(p, bands);
  if (w.size() < needed)
    throw SizeError("event " + w.event_id + ": " + std::to_string(w.size()) +
                    " samples is too short for alignment (need " + std::to_string(needed) + ")");

  TriggerResult result;
  std::optional<Index> onset;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const BasicWaveform<Scalar> filtered = bandpass_filter(w, bands[k]);
    const VectorX<Scalar> r = sta_lta_ratio(filtered.samples, p);
    result.ratios[k] = r.template cast<double>();
    const double max_r = r.size() > 0 ? static_cast<double>(r.maxCoeff()) : 0.0;
    if (!(max_r > 0.0)) continue;
    const double delta = trigger_threshold(max_r, p);
    result.thresholds[k] = delta;
    const std::optional<Index> crossing = first_crossing(r, delta);
    if (!crossing) continue;
    result.per_band_crossings[k] = crossing;
    Index band_onset = *crossing;
    if (p.label == OnsetLabel::ShortWindowEnd)
      band_onset = std::min<Index>(band_onset + p.short_window, w.size() - 1);
    result.per_band_onsets[k] = band_onset;
    onset = onset ? std::min(*onset, band_onset) : band_onset;
  }
  if (!onset) throw AlignmentError(w.event_id, "event " + w.event_id + ": no band produced a trigger");
  result.onset_index = *onset;
  return result;
}

/// Window [onset - before, onset + after] of a waveform (length before + after + 1).
template <typename Scalar>
BasicWaveform<Scalar> truncate_around_onset(const BasicWaveform<Scalar>& w, Index onset, Index before,
                                            Index after) {
  if (before < 0 || after < 0) throw ConfigError("truncation margins must be non-negative");
  if (onset - before < 0)
    throw TruncationError(TruncationError::Side::Before,
                          "event " + w.event_id + ": window starts " + std::to_string(before - onset) +
                              " samples before the signal");
  if (onset + after >= w.size())
    throw TruncationError(TruncationError::Side::After,
                          "event " + w.event_id + ": window ends " + std::to_string(onset + after - w.size() + 1) +
                              " samples past the signal");
  BasicWaveform<Scalar> out = w;
  out.samples = w.samples.segment(onset - before, before + after + 1);
  return out;
}

}  // namespace seismap
