#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "seismap/analysis.hpp"
#include "seismap/features.hpp"
#include "seismap/signal.hpp"

namespace seismap {

enum class EventType { Earthquake, Explosion };

std::string event_type_name(EventType t);
EventType parse_event_type(const std::string& s);

struct CatalogEntry {
  std::string event_id;
  EventType type{EventType::Explosion};
  double latitude{0.0};
  double longitude{0.0};
  std::optional<std::string> cluster;
  double fs{40.0};
  Index n_samples{0};
  /// Known onset sample, present for synthetic data.
  std::optional<Index> onset;

  void validate() const;
};

struct EventRecord {
  std::string event_id;
  std::array<Waveform, 3> channels;  // E, N, Z
  CatalogEntry entry;

  const Waveform& channel(Channel c) const { return channels[channel_slot(c)]; }
  void validate() const;
};

// ---- files -------------------------------------------------------------

std::vector<CatalogEntry> read_catalog(const std::filesystem::path& file);
void write_catalog(const std::filesystem::path& file, const std::vector<CatalogEntry>& entries);

Eigen::VectorXd read_f32le(const std::filesystem::path& file);
void write_f32le(const std::filesystem::path& file, const Eigen::VectorXd& samples);

struct IngestIssue {
  std::string event_id;
  std::string kind;
  std::string message;
};

struct IngestResult {
  std::vector<EventRecord> events;
  std::vector<IngestIssue> issues;
};

/// Loads `catalog.json` and one `<event_id>/{E,N,Z}.f32le` directory per
/// event. Broken events are reported in `issues` and skipped.
IngestResult ingest(const std::filesystem::path& dir);

void write_dataset(const std::filesystem::path& dir, const std::vector<EventRecord>& events);

// ---- configuration -----------------------------------------------------

enum class Method { SingleE, SingleN, SingleZ, MultiView, KernelProduct, KernelSum, Kcca };

std::string method_name(Method m);
Method parse_method(const std::string& s);
std::vector<Method> all_methods();

struct RunConfig {
  StaLtaParams stalta;
  std::array<BandPassSpec, 3> trigger_bands = default_trigger_bands();
  Index samples_before{1199};
  Index samples_after{3800};
  StftParams stft;
  BandTable band_table = BandTable::standard();
  double bandwidth_c{2.0};
  Index dims{4};
  int diffusion_time{1};
  Method method{Method::MultiView};
  double kcca_gamma{1e-3};
  std::array<Channel, 2> kcca_channels{Channel::N, Channel::Z};
  Index k_min{1};
  Index k_max{15};
  Index resample_multiple{2};
  Index resample_trials{200};
  Index anomaly_k{4};
  double anomaly_threshold_multiple{4.0};
  KnnAverage anomaly_average{KnnAverage::DivideByK};
  Index anomaly_dims{3};
  Channel location_channel{Channel::N};
  std::uint64_t seed{0};

  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static RunConfig load(const std::filesystem::path& file);
};

// ---- mapping -----------------------------------------------------------

/// Aligned sonovectors per channel for the events that survived alignment
/// and truncation.
struct FeatureSet {
  std::vector<std::string> event_ids;
  std::vector<std::size_t> source_index;  // position in the input event list
  std::vector<Index> onsets;
  std::array<Eigen::MatrixXd, 3> views;   // E, N, Z; one sonovector per row
  std::vector<IngestIssue> dropped;

  Index size() const { return static_cast<Index>(event_ids.size()); }
  const Eigen::MatrixXd& view(Channel c) const { return views[channel_slot(c)]; }
};

struct EventFeatures {
  Index onset{0};
  std::array<Eigen::VectorXd, 3> sonovectors;
};

/// Align on Z, cut every channel around the onset and compute sonovectors.
EventFeatures event_features(const EventRecord& event, const RunConfig& cfg);

FeatureSet prepare_features(const std::vector<EventRecord>& events, const RunConfig& cfg);

struct MappingResult {
  Method method{Method::MultiView};
  std::vector<std::string> event_ids;
  Eigen::MatrixXd coords;        // classification-ready representation
  Eigen::VectorXd eigenvalues;   // canonical correlations for KCCA
  std::vector<std::string> view_names;
  std::vector<Eigen::MatrixXd> view_coords;  // one block per view name
  std::vector<IngestIssue> dropped;
};

/// Embeds the feature set (or the `subset` rows of it) with one method.
MappingResult embed_features(const FeatureSet& features, const RunConfig& cfg, Method method,
                             const std::vector<Index>& subset = {});

MappingResult run_mapping(const std::vector<EventRecord>& events, const RunConfig& cfg);

// ---- experiments -------------------------------------------------------

struct CurvePoint {
  Index k{1};
  std::string method;
  double mean_accuracy{0.0};
  double std_accuracy{0.0};
};

struct ClassificationOptions {
  std::vector<Method> methods;
  std::vector<Index> ks;
  bool resample{false};
  Index resample_multiple{2};
  Index trials{1};
  std::uint64_t seed{0};
};

/// Leave-one-out accuracy per (method, K), averaged over balanced resampling
/// trials when requested.
std::vector<CurvePoint> classification_curve(const FeatureSet& features, const std::vector<std::string>& labels,
                                             const RunConfig& cfg, const ClassificationOptions& options);

/// Diffusion-map versus PCA correlation with catalog location, both on the
/// configured channel.
std::vector<LocationEval> location_evaluation(const FeatureSet& features, const Eigen::VectorXd& lat,
                                              const Eigen::VectorXd& lon, const RunConfig& cfg);

AnomalyReport anomaly_screen(const FeatureSet& features, const RunConfig& cfg, Method method = Method::SingleZ);

// ---- synthetic data ----------------------------------------------------

struct SyntheticClass {
  std::string label;
  EventType type{EventType::Explosion};
  Index count{0};
  std::array<double, 11> profile{};  // energy per standard band
  double latitude{30.0};
  double longitude{35.0};
  /// Coda decay time; zero means the spec-wide value.
  double decay_seconds{0.0};
};

/// Events whose dominant band slides with a location parameter s in [0, 1];
/// latitude and longitude move linearly with s.
struct LocationDrift {
  bool enabled{false};
  Index count{0};
  std::string label{"drift"};
  EventType type{EventType::Explosion};
  double band_from{4.0};  // 0-based band index of the spectral peak at s = 0
  double band_to{9.0};
  double width{0.6};
  double floor{0.02};
  double lat_from{30.4};
  double lat_to{31.7};
  double lon_from{34.9};
  double lon_to{35.3};
};

struct SyntheticSpec {
  std::vector<SyntheticClass> classes;
  LocationDrift drift;
  Index n_samples{6000};
  double fs{40.0};
  Index onset_min{1300};
  Index onset_max{1450};
  /// Background noise energy per standard band; the default mimics a
  /// microseism peak below 2 Hz over a weak flat floor. Scaled so the total
  /// noise power sits snr_db below the peak burst power.
  std::array<double, 11> noise_profile{0.0, 0.1, 0.3, 0.3, 0.1, 0.03, 0.03, 0.03, 0.03, 0.03, 0.03};
  double snr_db_min{15.0};
  double snr_db_max{25.0};
  double decay_seconds{2.5};
  double decay_jitter{0.2};
  double profile_jitter{0.25};
  double channel_jitter{0.3};
  std::uint64_t seed{1};

  void validate() const;
};

std::vector<EventRecord> synthesize(const SyntheticSpec& spec);

/// Presets used by the CLI and the acceptance suite.
SyntheticSpec discrimination_preset(std::uint64_t seed, Index earthquakes = 150, Index explosions = 400);
SyntheticSpec quarry_preset(std::uint64_t seed, Index per_cluster = 60);
SyntheticSpec location_preset(std::uint64_t seed, Index count = 200);
SyntheticSpec anomaly_preset(std::uint64_t seed, Index normal = 97, Index anomalous = 3);
SyntheticSpec synthetic_preset(const std::string& name, std::uint64_t seed);

// ---- CSV ---------------------------------------------------------------

std::string format_double(double v);
void write_embedding_csv(std::ostream& out, const MappingResult& mapping);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
void write_anomaly_csv(std::ostream& out, const std::vector<std::string>& event_ids, const AnomalyReport& report);
void write_location_csv(std::ostream& out, const std::vector<LocationEval>& rows);
void write_sonogram_csv(std::ostream& out, const Sonogram& sonogram);

}  // namespace seismap
