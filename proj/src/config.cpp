#include <fstream>
#include <set>

#include "seismap/pipeline.hpp"

namespace seismap {

using nlohmann::json;

std::string method_name(Method m) {
  switch (m) {
    case Method::SingleE: return "single_E";
    case Method::SingleN: return "single_N";
    case Method::SingleZ: return "single_Z";
    case Method::MultiView: return "multiview";
    case Method::KernelProduct: return "KP";
    case Method::KernelSum: return "KS";
    case Method::Kcca: return "KCCA";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  for (Method m : all_methods())
    if (method_name(m) == s) return m;
  throw ConfigError("unknown method '" + s + "' (expected single_E, single_N, single_Z, multiview, KP, KS or KCCA)");
}

std::vector<Method> all_methods() {
  return {Method::SingleE, Method::SingleN, Method::SingleZ, Method::MultiView,
          Method::KernelProduct, Method::KernelSum, Method::Kcca};
}

// Band limits are checked against 40 Hz here only as a sanity bound; the
// true sampling rate is checked again per event.
void RunConfig::validate() const {
  stalta.validate();
  for (const auto& b : trigger_bands) validate_band(b, 40.0);
  if (samples_before < 0 || samples_after < 0) throw ConfigError("truncation margins N1 and N2 must be non-negative");
  stft.validate();
  if (samples_before + samples_after + 1 < stft.window_len)
    throw ConfigError("truncated length N1 + N2 + 1 is shorter than the STFT window");
  band_table.validate(40.0);
  if (!(bandwidth_c > 0.0)) throw ConfigError("bandwidth constant C must be positive");
  if (dims < 1) throw ConfigError("embedding dimension d must be positive");
  if (diffusion_time < 1) throw ConfigError("diffusion time t must be a positive integer");
  if (!(kcca_gamma > 0.0)) throw ConfigError("KCCA gamma must be positive");
  if (kcca_channels[0] == kcca_channels[1]) throw ConfigError("KCCA needs two distinct channels");
  if (k_min < 1 || k_max < k_min) throw ConfigError("K range must satisfy 1 <= k_min <= k_max");
  if (resample_multiple < 1 || resample_trials < 1) throw ConfigError("resampling multiple and trials must be positive");
  if (anomaly_k < 2) throw ConfigError("anomaly K must be at least 2");
  if (!(anomaly_threshold_multiple > 0.0)) throw ConfigError("anomaly threshold multiple must be positive");
  if (anomaly_dims < 1) throw ConfigError("anomaly embedding dimension must be positive");
}

namespace {

OnsetLabel parse_label(const std::string& s) {
  if (s == "window_start") return OnsetLabel::WindowStart;
  if (s == "short_window_end") return OnsetLabel::ShortWindowEnd;
  throw ConfigError("onset_label must be window_start or short_window_end");
}

std::string label_name(OnsetLabel l) { return l == OnsetLabel::WindowStart ? "window_start" : "short_window_end"; }

KnnAverage parse_average(const std::string& s) {
  if (s == "k") return KnnAverage::DivideByK;
  if (s == "k-1") return KnnAverage::DivideByKMinusOne;
  throw ConfigError("anomaly_average must be \"k\" or \"k-1\"");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known{
      "short_window", "long_window", "threshold_cap", "threshold_frac", "onset_label", "trigger_bands",
      "samples_before", "samples_after", "window_len", "overlap", "band_table", "bandwidth_c", "dims", "t",
      "method", "kcca_gamma", "kcca_channels", "k_min", "k_max", "resample_multiple", "resample_trials",
      "anomaly_k", "anomaly_threshold_multiple", "anomaly_average", "anomaly_dims", "location_channel", "seed"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");

  RunConfig c;
  try {
    read_if(j, "short_window", c.stalta.short_window);
    read_if(j, "long_window", c.stalta.long_window);
    read_if(j, "threshold_cap", c.stalta.threshold_cap);
    read_if(j, "threshold_frac", c.stalta.threshold_frac);
    if (j.contains("onset_label")) c.stalta.label = parse_label(j.at("onset_label").get<std::string>());
    if (j.contains("trigger_bands")) {
      const auto& tb = j.at("trigger_bands");
      if (!tb.is_array() || tb.size() != 3) throw ConfigError("trigger_bands must list exactly three bands");
      for (std::size_t k = 0; k < 3; ++k) {
        const auto& row = tb.at(k);
        c.trigger_bands[k].f_low = row.at(0).get<double>();
        c.trigger_bands[k].f_high = row.at(1).get<double>();
        if (row.size() > 2) c.trigger_bands[k].num_taps = row.at(2).get<Index>();
      }
    }
    read_if(j, "samples_before", c.samples_before);
    read_if(j, "samples_after", c.samples_after);
    read_if(j, "window_len", c.stft.window_len);
    read_if(j, "overlap", c.stft.overlap);
    if (j.contains("band_table")) {
      c.band_table.bands.clear();
      for (const auto& row : j.at("band_table"))
        c.band_table.bands.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    }
    read_if(j, "bandwidth_c", c.bandwidth_c);
    read_if(j, "dims", c.dims);
    read_if(j, "t", c.diffusion_time);
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    read_if(j, "kcca_gamma", c.kcca_gamma);
    if (j.contains("kcca_channels")) {
      const auto& kc = j.at("kcca_channels");
      if (!kc.is_array() || kc.size() != 2) throw ConfigError("kcca_channels must name exactly two channels");
      for (std::size_t k = 0; k < 2; ++k) c.kcca_channels[k] = parse_channel(kc.at(k).get<std::string>());
    }
    read_if(j, "k_min", c.k_min);
    read_if(j, "k_max", c.k_max);
    read_if(j, "resample_multiple", c.resample_multiple);
    read_if(j, "resample_trials", c.resample_trials);
    read_if(j, "anomaly_k", c.anomaly_k);
    read_if(j, "anomaly_threshold_multiple", c.anomaly_threshold_multiple);
    if (j.contains("anomaly_average")) c.anomaly_average = parse_average(j.at("anomaly_average").get<std::string>());
    read_if(j, "anomaly_dims", c.anomaly_dims);
    if (j.contains("location_channel"))
      c.location_channel = parse_channel(j.at("location_channel").get<std::string>());
    read_if(j, "seed", c.seed);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad configuration value: ") + ex.what());
  }
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["short_window"] = stalta.short_window;
  j["long_window"] = stalta.long_window;
  j["threshold_cap"] = stalta.threshold_cap;
  j["threshold_frac"] = stalta.threshold_frac;
  j["onset_label"] = label_name(stalta.label);
  j["trigger_bands"] = json::array();
  for (const auto& b : trigger_bands) j["trigger_bands"].push_back({b.f_low, b.f_high, b.num_taps});
  j["samples_before"] = samples_before;
  j["samples_after"] = samples_after;
  j["window_len"] = stft.window_len;
  j["overlap"] = stft.overlap;
  j["band_table"] = json::array();
  for (const auto& b : band_table.bands) j["band_table"].push_back({b.f_start, b.f_end});
  j["bandwidth_c"] = bandwidth_c;
  j["dims"] = dims;
  j["t"] = diffusion_time;
  j["method"] = method_name(method);
  j["kcca_gamma"] = kcca_gamma;
  j["kcca_channels"] = {std::string(1, channel_name(kcca_channels[0])), std::string(1, channel_name(kcca_channels[1]))};
  j["k_min"] = k_min;
  j["k_max"] = k_max;
  j["resample_multiple"] = resample_multiple;
  j["resample_trials"] = resample_trials;
  j["anomaly_k"] = anomaly_k;
  j["anomaly_threshold_multiple"] = anomaly_threshold_multiple;
  j["anomaly_average"] = anomaly_average == KnnAverage::DivideByK ? "k" : "k-1";
  j["anomaly_dims"] = anomaly_dims;
  j["location_channel"] = std::string(1, channel_name(location_channel));
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open configuration " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError("configuration " + file.string() + " is not valid JSON: " + ex.what());
  }
  return from_json(j);
}

}  // namespace seismap
