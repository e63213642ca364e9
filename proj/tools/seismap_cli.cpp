// Command-line front end: synth, embed, classify, locate-eval, anomaly, inspect.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "seismap/pipeline.hpp"

namespace {

using nlohmann::json;
using namespace seismap;

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

void emit_warning(const IngestIssue& issue) {
  std::cerr << json{{"warning", issue.kind}, {"event_id", issue.event_id}, {"message", issue.message}}.dump() << '\n';
}

// Options shared by every subcommand that runs the mapping. Unset flags
// leave the config-file value in place.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::int64_t> short_window, long_window, samples_before, samples_after, window_len, dims, t, seed,
      resample_trials, resample_multiple, anomaly_k, anomaly_dims;
  std::optional<double> overlap, bandwidth_c, gamma, threshold_multiple;
  std::optional<std::string> method, onset_label, location_channel, anomaly_average;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--short-window", short_window, "STA window S (samples)");
    app->add_option("--long-window", long_window, "LTA window L (samples)");
    app->add_option("--onset-label", onset_label, "window_start or short_window_end");
    app->add_option("--n1", samples_before, "samples kept before the onset");
    app->add_option("--n2", samples_after, "samples kept after the onset");
    app->add_option("--window-len", window_len, "STFT window N0");
    app->add_option("--overlap", overlap, "STFT overlap s");
    app->add_option("--bandwidth-c", bandwidth_c, "max-min bandwidth constant C");
    app->add_option("--dims", dims, "embedding dimension d");
    app->add_option("--t", t, "diffusion time (positive integer)");
    app->add_option("--method", method, "single_E|single_N|single_Z|multiview|KP|KS|KCCA");
    app->add_option("--gamma", gamma, "KCCA regulariser");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--trials", resample_trials, "resampling trials");
    app->add_option("--resample-multiple", resample_multiple, "majority draws per minority event");
    app->add_option("--k", anomaly_k, "anomaly neighbourhood size K");
    app->add_option("--threshold-multiple", threshold_multiple, "anomaly threshold as a multiple of the median");
    app->add_option("--anomaly-dims", anomaly_dims, "embedding dimension for the anomaly screen");
    app->add_option("--anomaly-average", anomaly_average, "k or k-1");
    app->add_option("--channel", location_channel, "channel for locate-eval (E, N or Z)");
  }

  RunConfig resolve() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      try {
        in >> j;
      } catch (const json::exception& ex) {
        throw ConfigError("configuration " + config_path + " is not valid JSON: " + ex.what());
      }
    }
    auto set = [&](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    set("short_window", short_window);
    set("long_window", long_window);
    set("onset_label", onset_label);
    set("samples_before", samples_before);
    set("samples_after", samples_after);
    set("window_len", window_len);
    set("overlap", overlap);
    set("bandwidth_c", bandwidth_c);
    set("dims", dims);
    set("t", t);
    set("method", method);
    set("kcca_gamma", gamma);
    set("seed", seed);
    set("resample_trials", resample_trials);
    set("resample_multiple", resample_multiple);
    set("anomaly_k", anomaly_k);
    set("anomaly_threshold_multiple", threshold_multiple);
    set("anomaly_dims", anomaly_dims);
    set("anomaly_average", anomaly_average);
    set("location_channel", location_channel);
    return RunConfig::from_json(j);
  }
};

// Writes to `path`, or stdout when empty.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RunError("cannot write " + path);
  fn(out);
}

std::vector<EventRecord> load(const std::string& dir) {
  IngestResult r = ingest(dir);
  for (const auto& issue : r.issues) emit_warning(issue);
  return std::move(r.events);
}

FeatureSet features_of(const std::vector<EventRecord>& events, const RunConfig& cfg) {
  FeatureSet f = prepare_features(events, cfg);
  for (const auto& issue : f.dropped) emit_warning(issue);
  if (f.size() < 3)
    throw RunError("only " + std::to_string(f.size()) + " events survived alignment; at least 3 are needed");
  return f;
}

std::pair<Index, Index> parse_k_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const Index k = std::stol(s);
      return {k, k};
    }
    return {std::stol(s.substr(0, colon)), std::stol(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ConfigError("K range must look like 1:15");
  }
}

std::vector<Method> parse_methods(const std::string& s) {
  if (s == "all") return all_methods();
  std::vector<Method> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_method(item));
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-fusion manifold learning for three-component seismic events"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  std::string synth_preset = "discrimination", synth_out;
  std::uint64_t synth_seed = 1;
  std::optional<double> snr_min, snr_max;
  synth->add_option("--preset", synth_preset, "discrimination, quarry, location or anomaly");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--snr-min", snr_min, "lowest SNR (dB)");
  synth->add_option("--snr-max", snr_max, "highest SNR (dB)");
  synth->add_option("--out", synth_out, "output directory")->required();

  // embed
  auto* embed_cmd = app.add_subcommand("embed", "align, extract sonovectors and embed");
  ConfigFlags embed_flags;
  std::string embed_data, embed_out;
  embed_cmd->add_option("--data", embed_data, "dataset directory")->required();
  embed_cmd->add_option("--out", embed_out, "embedding CSV (default stdout)");
  embed_flags.attach(embed_cmd);

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "leave-one-out accuracy against K");
  ConfigFlags classify_flags;
  std::string classify_data, classify_out, task = "type", k_range, methods_arg;
  bool no_resample = false;
  classify_cmd->add_option("--data", classify_data, "dataset directory")->required();
  classify_cmd->add_option("--task", task, "type (earthquake vs explosion) or cluster");
  classify_cmd->add_option("--k-range", k_range, "K range, e.g. 1:15");
  classify_cmd->add_option("--methods", methods_arg, "comma list or 'all' (default: method from config)");
  classify_cmd->add_flag("--no-resample", no_resample, "use every event once instead of balanced trials");
  classify_cmd->add_option("--out", classify_out, "curve CSV (default stdout)");
  classify_flags.attach(classify_cmd);

  // locate-eval
  auto* locate_cmd = app.add_subcommand("locate-eval", "correlate DM and PCA coordinates with location");
  ConfigFlags locate_flags;
  std::string locate_data, locate_out;
  locate_cmd->add_option("--data", locate_data, "dataset directory")->required();
  locate_cmd->add_option("--out", locate_out, "Pearson table CSV (default stdout)");
  locate_flags.attach(locate_cmd);

  // anomaly
  auto* anomaly_cmd = app.add_subcommand("anomaly", "K-NN average-distance screening");
  ConfigFlags anomaly_flags;
  std::string anomaly_data, anomaly_out;
  anomaly_cmd->add_option("--data", anomaly_data, "dataset directory")->required();
  anomaly_cmd->add_option("--out", anomaly_out, "anomaly CSV (default stdout)");
  anomaly_flags.attach(anomaly_cmd);

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "dump the sonogram of one event");
  ConfigFlags inspect_flags;
  std::string inspect_data, inspect_event, inspect_out, inspect_channel = "Z";
  bool raw = false;
  inspect_cmd->add_option("--data", inspect_data, "dataset directory")->required();
  inspect_cmd->add_option("--event", inspect_event, "event_id")->required();
  inspect_cmd->add_option("--component", inspect_channel, "E, N or Z");
  inspect_cmd->add_flag("--raw", raw, "use the whole record instead of the aligned window");
  inspect_cmd->add_option("--out", inspect_out, "sonogram CSV (default stdout)");
  inspect_flags.attach(inspect_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }

  try {
    if (*synth) {
      SyntheticSpec spec = synthetic_preset(synth_preset, synth_seed);
      if (snr_min) spec.snr_db_min = *snr_min;
      if (snr_max) spec.snr_db_max = *snr_max;
      write_dataset(synth_out, synthesize(spec));
    } else if (*embed_cmd) {
      const RunConfig cfg = embed_flags.resolve();
      const auto events = load(embed_data);
      const FeatureSet f = features_of(events, cfg);
      const MappingResult mr = embed_features(f, cfg, cfg.method);
      with_output(embed_out, [&](std::ostream& o) { write_embedding_csv(o, mr); });
    } else if (*classify_cmd) {
      const RunConfig cfg = classify_flags.resolve();
      const auto events = load(classify_data);
      const FeatureSet f = features_of(events, cfg);
      std::vector<std::string> labels;
      for (std::size_t i : f.source_index) {
        const CatalogEntry& e = events[i].entry;
        if (task == "type") {
          labels.push_back(event_type_name(e.type));
        } else if (task == "cluster") {
          if (!e.cluster) throw ConfigError("event " + e.event_id + " has no cluster label");
          labels.push_back(*e.cluster);
        } else {
          throw ConfigError("task must be type or cluster");
        }
      }
      ClassificationOptions opt;
      opt.methods = methods_arg.empty() ? std::vector<Method>{cfg.method} : parse_methods(methods_arg);
      auto [k_lo, k_hi] = k_range.empty() ? std::pair<Index, Index>{cfg.k_min, cfg.k_max} : parse_k_range(k_range);
      if (k_lo < 1 || k_hi < k_lo) throw ConfigError("K range must satisfy 1 <= lo <= hi");
      for (Index k = k_lo; k <= k_hi; ++k) opt.ks.push_back(k);
      opt.resample = task == "type" && !no_resample;
      opt.resample_multiple = cfg.resample_multiple;
      opt.trials = cfg.resample_trials;
      opt.seed = cfg.seed;
      const auto curve = classification_curve(f, labels, cfg, opt);
      with_output(classify_out, [&](std::ostream& o) { write_curve_csv(o, curve); });
    } else if (*locate_cmd) {
      const RunConfig cfg = locate_flags.resolve();
      const auto events = load(locate_data);
      const FeatureSet f = features_of(events, cfg);
      Eigen::VectorXd lat(f.size()), lon(f.size());
      for (Index i = 0; i < f.size(); ++i) {
        const CatalogEntry& e = events[f.source_index[static_cast<std::size_t>(i)]].entry;
        lat(i) = e.latitude;
        lon(i) = e.longitude;
      }
      const auto rows = location_evaluation(f, lat, lon, cfg);
      with_output(locate_out, [&](std::ostream& o) { write_location_csv(o, rows); });
    } else if (*anomaly_cmd) {
      RunConfig cfg = anomaly_flags.resolve();
      const Method method = anomaly_flags.method ? cfg.method : Method::SingleZ;
      const auto events = load(anomaly_data);
      const FeatureSet f = features_of(events, cfg);
      const AnomalyReport report = anomaly_screen(f, cfg, method);
      with_output(anomaly_out, [&](std::ostream& o) { write_anomaly_csv(o, f.event_ids, report); });
    } else if (*inspect_cmd) {
      const RunConfig cfg = inspect_flags.resolve();
      const auto events = load(inspect_data);
      const auto it = std::find_if(events.begin(), events.end(),
                                   [&](const EventRecord& e) { return e.event_id == inspect_event; });
      if (it == events.end()) throw ConfigError("event " + inspect_event + " is not in the dataset");
      const Channel c = parse_channel(inspect_channel);
      Waveform w = it->channel(c);
      if (!raw) {
        const TriggerResult trig = align_trigger(it->channel(Channel::Z), cfg.stalta, cfg.trigger_bands);
        w = truncate_around_onset(w, trig.onset_index, cfg.samples_before, cfg.samples_after);
      }
      const Sonogram s = waveform_sonogram(w, cfg.stft, cfg.band_table);
      with_output(inspect_out, [&](std::ostream& o) { write_sonogram_csv(o, s); });
    }
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
