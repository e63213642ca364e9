#include <cmath>
#include <complex>
#include <cstdio>
#include <random>

#include <unsupported/Eigen/FFT>

#include "seismap/pipeline.hpp"

namespace seismap {

void SyntheticSpec::validate() const {
  if (classes.empty() && !(drift.enabled && drift.count > 0)) throw ConfigError("synthetic spec defines no events");
  for (const auto& c : classes) {
    if (c.count < 0) throw ConfigError("class " + c.label + " has a negative event count");
    double total = 0.0;
    for (double v : c.profile) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("class " + c.label + " has a negative band energy");
      total += v;
    }
    if (!(total > 0.0)) throw ConfigError("class " + c.label + " has an all-zero band profile");
    if (c.decay_seconds < 0.0) throw ConfigError("class " + c.label + " has a negative decay time");
  }
  if (drift.enabled) {
    if (drift.count < 0) throw ConfigError("drift event count is negative");
    if (!(drift.width > 0.0) || drift.floor < 0.0) throw ConfigError("drift width must be positive, floor non-negative");
  }
  double noise_total = 0.0;
  for (double v : noise_profile) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("noise profile must be non-negative");
    noise_total += v;
  }
  if (!(noise_total > 0.0)) throw ConfigError("noise profile is all zero");
  if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
  if (onset_min < 0 || onset_max < onset_min || onset_max >= n_samples)
    throw ConfigError("onset range must lie inside the record");
  if (!std::isfinite(snr_db_min) || !std::isfinite(snr_db_max) || snr_db_max < snr_db_min)
    throw ConfigError("SNR range must be finite and ordered");
  if (!(decay_seconds > 0.0)) throw ConfigError("decay time must be positive");
  if (profile_jitter < 0.0 || channel_jitter < 0.0 || decay_jitter < 0.0)
    throw ConfigError("jitter magnitudes must be non-negative");
}

namespace {

constexpr std::size_t kBands = 11;
using Profile = std::array<double, kBands>;

// Band index of a frequency under the standard table, start-inclusive.
std::size_t band_of(double f, const BandTable& bt) {
  std::size_t b = 0;
  for (std::size_t k = 1; k < bt.bands.size(); ++k)
    if (f >= bt.bands[k].f_start) b = k;
  return b;
}

Profile normalised(Profile p) {
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

Profile jittered(const Profile& p, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Profile out = p;
  for (double& v : out) v *= std::exp(sigma * g(rng));
  return normalised(out);
}

// Unit-variance Gaussian noise whose energy per band follows `profile`.
Eigen::VectorXd shaped_noise(const Profile& profile, Index n, double fs, std::mt19937_64& rng) {
  const BandTable bt = BandTable::standard();
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd white(n);
  for (Index i = 0; i < n; ++i) white(i) = g(rng);

  Eigen::FFT<double> fft;
  Eigen::VectorXcd spec;
  fft.fwd(spec, white);

  std::array<Index, kBands> bins{};
  for (Index k = 0; k <= n / 2; ++k) ++bins[band_of(static_cast<double>(k) * fs / static_cast<double>(n), bt)];
  for (Index k = 0; k <= n / 2; ++k) {
    const std::size_t b = band_of(static_cast<double>(k) * fs / static_cast<double>(n), bt);
    const double gain = std::sqrt(profile[b] / static_cast<double>(bins[b]));
    spec(k) *= gain;
    if (k != 0 && k != n - k) spec(n - k) *= gain;
  }
  Eigen::VectorXd out;
  fft.inv(out, spec);
  const double rms = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  return rms > 0.0 ? (out / rms).eval() : out;
}

struct EventPlan {
  std::string label;
  EventType type{EventType::Explosion};
  Profile profile{};
  double latitude{0.0};
  double longitude{0.0};
  double decay_seconds{0.0};
};

Profile drift_profile(const LocationDrift& d, double s) {
  const double centre = d.band_from + s * (d.band_to - d.band_from);
  Profile p{};
  for (std::size_t b = 0; b < kBands; ++b) {
    const double z = (static_cast<double>(b) - centre) / d.width;
    p[b] = d.floor + std::exp(-0.5 * z * z);
  }
  return p;
}

}  // namespace

std::vector<EventRecord> synthesize(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 master(spec.seed);

  std::vector<EventPlan> plans;
  for (const auto& c : spec.classes)
    for (Index i = 0; i < c.count; ++i) plans.push_back({c.label, c.type, c.profile, c.latitude, c.longitude, c.decay_seconds});
  if (spec.drift.enabled) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Index i = 0; i < spec.drift.count; ++i) {
      const double s = u(master);
      plans.push_back({spec.drift.label, spec.drift.type, drift_profile(spec.drift, s),
                       spec.drift.lat_from + s * (spec.drift.lat_to - spec.drift.lat_from),
                       spec.drift.lon_from + s * (spec.drift.lon_to - spec.drift.lon_from), 0.0});
    }
  }

  std::vector<EventRecord> events;
  events.reserve(plans.size());
  for (std::size_t e = 0; e < plans.size(); ++e) {
    std::mt19937_64 rng(master());
    const EventPlan& plan = plans[e];
    std::uniform_int_distribution<Index> onset_dist(spec.onset_min, spec.onset_max);
    std::uniform_real_distribution<double> snr_dist(spec.snr_db_min, spec.snr_db_max);
    std::normal_distribution<double> g(0.0, 1.0);
    const Index onset = onset_dist(rng);
    const double snr_db = snr_dist(rng);
    const double decay = (plan.decay_seconds > 0.0 ? plan.decay_seconds : spec.decay_seconds) * std::exp(spec.decay_jitter * g(rng)) * spec.fs;
    const double noise_sigma = std::pow(10.0, -snr_db / 20.0);
    const Profile noise_profile = normalised(spec.noise_profile);
    const Profile event_profile = jittered(normalised(plan.profile), spec.profile_jitter, rng);

    char id[32];
    std::snprintf(id, sizeof id, "ev%05zu", e + 1);
    EventRecord rec;
    rec.event_id = id;
    rec.entry.event_id = id;
    rec.entry.type = plan.type;
    rec.entry.latitude = plan.latitude;
    rec.entry.longitude = plan.longitude;
    rec.entry.cluster = plan.label;
    rec.entry.fs = spec.fs;
    rec.entry.n_samples = spec.n_samples;
    rec.entry.onset = onset;

    for (Channel c : kChannels) {
      const Profile channel_profile = jittered(event_profile, spec.channel_jitter, rng);
      const Eigen::VectorXd burst = shaped_noise(channel_profile, spec.n_samples, spec.fs, rng);
      const Eigen::VectorXd background = shaped_noise(noise_profile, spec.n_samples, spec.fs, rng);
      Waveform& w = rec.channels[channel_slot(c)];
      w.samples.resize(spec.n_samples);
      w.fs = spec.fs;
      w.channel = c;
      w.event_id = id;
      for (Index i = 0; i < spec.n_samples; ++i) {
        const double envelope = i < onset ? 0.0 : std::exp(-static_cast<double>(i - onset) / decay);
        // Rounded through float so in-memory events match their files.
        w.samples(i) = static_cast<double>(static_cast<float>(envelope * burst(i) + noise_sigma * background(i)));
      }
    }
    events.push_back(std::move(rec));
  }
  return events;
}

// ---- presets -----------------------------------------------------------

namespace {

// Energy concentrated in one band over a floor spanning bands 5-10 (1-based),
// so every trigger band sees the arrival.
Profile peaked(std::size_t band, double peak = 1.0, double floor = 0.08) {
  Profile p{};
  for (std::size_t b = 4; b <= 9; ++b) p[b] = floor;
  p[band] += peak;
  return p;
}

}  // namespace

SyntheticSpec discrimination_preset(std::uint64_t seed, Index earthquakes, Index explosions) {
  SyntheticSpec s;
  s.seed = seed;
  s.classes = {{"earthquake", EventType::Earthquake, earthquakes, peaked(5), 30.5, 35.4},
               {"explosion", EventType::Explosion, explosions, peaked(8), 31.0, 35.0}};
  return s;
}

SyntheticSpec quarry_preset(std::uint64_t seed, Index per_cluster) {
  SyntheticSpec s;
  s.seed = seed;
  const double lat[] = {29.6, 30.2, 30.9, 31.5, 32.1};
  const std::size_t peak[] = {4, 5, 6, 7, 8};
  const double decay[] = {1.5, 3.0, 2.0, 3.5, 2.5};
  for (std::size_t k = 0; k < 5; ++k)
    s.classes.push_back({"Q" + std::to_string(k + 1), EventType::Explosion, per_cluster, peaked(peak[k], 3.0), lat[k],
                         35.0 + 0.1 * static_cast<double>(k), decay[k]});
  return s;
}

SyntheticSpec location_preset(std::uint64_t seed, Index count) {
  SyntheticSpec s;
  s.seed = seed;
  s.drift.enabled = true;
  s.drift.count = count;
  s.profile_jitter = 0.1;
  s.channel_jitter = 0.1;
  return s;
}

SyntheticSpec anomaly_preset(std::uint64_t seed, Index normal, Index anomalous) {
  SyntheticSpec s;
  s.seed = seed;
  // A homogeneous blast population; the outliers carry low-frequency energy
  // and a long coda that none of the normal events have.
  s.profile_jitter = 0.05;
  s.channel_jitter = 0.05;
  s.decay_jitter = 0.05;
  s.classes = {{"normal", EventType::Explosion, normal, peaked(6), 30.8, 35.2},
               {"anomaly", EventType::Earthquake, anomalous, peaked(2), 31.6, 35.5, 10.0}};
  return s;
}

SyntheticSpec synthetic_preset(const std::string& name, std::uint64_t seed) {
  if (name == "discrimination") return discrimination_preset(seed);
  if (name == "quarry") return quarry_preset(seed);
  if (name == "location") return location_preset(seed);
  if (name == "anomaly") return anomaly_preset(seed);
  throw ConfigError("unknown synthetic preset '" + name + "' (expected discrimination, quarry, location or anomaly)");
}

}  // namespace seismap
