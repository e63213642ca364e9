#include <algorithm>
#include <cmath>

#include "seismap/diffusion.hpp"
#include "seismap/fusion.hpp"
#include "seismap/pipeline.hpp"

namespace seismap {

EventFeatures event_features(const EventRecord& event, const RunConfig& cfg) {
  const TriggerResult trig = align_trigger(event.channel(Channel::Z), cfg.stalta, cfg.trigger_bands);
  EventFeatures out;
  out.onset = trig.onset_index;
  for (Channel c : kChannels) {
    const Waveform cut = truncate_around_onset(event.channel(c), out.onset, cfg.samples_before, cfg.samples_after);
    out.sonovectors[channel_slot(c)] = waveform_sonovector(cut, cfg.stft, cfg.band_table).x;
  }
  return out;
}

FeatureSet prepare_features(const std::vector<EventRecord>& events, const RunConfig& cfg) {
  cfg.validate();
  FeatureSet fs;
  std::vector<EventFeatures> kept;
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      kept.push_back(event_features(events[i], cfg));
    } catch (const AlignmentError& ex) {
      fs.dropped.push_back({events[i].event_id, ex.kind(), ex.what()});
      continue;
    } catch (const TruncationError& ex) {
      fs.dropped.push_back({events[i].event_id, ex.kind(), ex.what()});
      continue;
    } catch (const SizeError& ex) {
      fs.dropped.push_back({events[i].event_id, ex.kind(), ex.what()});
      continue;
    }
    fs.event_ids.push_back(events[i].event_id);
    fs.source_index.push_back(i);
    fs.onsets.push_back(kept.back().onset);
  }
  const Index m = static_cast<Index>(kept.size());
  const Index dim = m > 0 ? kept.front().sonovectors[0].size() : 0;
  for (std::size_t slot = 0; slot < 3; ++slot) {
    fs.views[slot].resize(m, dim);
    for (Index i = 0; i < m; ++i) fs.views[slot].row(i) = kept[static_cast<std::size_t>(i)].sonovectors[slot].transpose();
  }
  return fs;
}

namespace {

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<Index>& subset) {
  if (subset.empty()) return x;
  Eigen::MatrixXd out(static_cast<Index>(subset.size()), x.cols());
  for (std::size_t r = 0; r < subset.size(); ++r) out.row(static_cast<Index>(r)) = x.row(subset[r]);
  return out;
}

KernelMatrix view_kernel(const FeatureSet& f, Channel c, const RunConfig& cfg, const std::vector<Index>& subset) {
  KernelMatrix k = rbf_kernel_max_min(select_rows(f.view(c), subset), cfg.bandwidth_c);
  k.view = c;
  return k;
}

std::string view_label(Channel c) { return std::string(1, channel_name(c)); }

}  // namespace

MappingResult embed_features(const FeatureSet& features, const RunConfig& cfg, Method method,
                             const std::vector<Index>& subset) {
  for (Index i : subset)
    if (i < 0 || i >= features.size()) throw ConfigError("subset index out of range");
  const Index m = subset.empty() ? features.size() : static_cast<Index>(subset.size());
  if (m < 3) throw RunError("need at least 3 usable events, have " + std::to_string(m));
  if (cfg.dims > m - 1) throw ConfigError("embedding dimension d exceeds M - 1");

  MappingResult out;
  out.method = method;
  out.dropped = features.dropped;
  if (subset.empty()) {
    out.event_ids = features.event_ids;
  } else {
    for (Index i : subset) out.event_ids.push_back(features.event_ids[static_cast<std::size_t>(i)]);
  }

  const int t = cfg.diffusion_time;
  switch (method) {
    case Method::SingleE:
    case Method::SingleN:
    case Method::SingleZ: {
      const Channel c = method == Method::SingleE ? Channel::E : method == Method::SingleN ? Channel::N : Channel::Z;
      const Embedding e = embed(row_normalize(view_kernel(features, c, cfg, subset)), cfg.dims, t);
      out.coords = e.coords;
      out.eigenvalues = e.eigenvalues;
      out.view_names = {view_label(c)};
      out.view_coords = {e.coords};
      break;
    }
    case Method::MultiView: {
      std::vector<KernelMatrix> ks;
      for (Channel c : kChannels) ks.push_back(view_kernel(features, c, cfg, subset));
      const MultiViewEmbedding e = multiview_embed(build_multiview(ks), cfg.dims, t);
      out.coords = e.concatenated;
      out.eigenvalues = e.eigenvalues;
      for (Channel c : kChannels) out.view_names.push_back(view_label(c));
      out.view_coords = e.per_view_coords;
      break;
    }
    case Method::KernelProduct:
    case Method::KernelSum: {
      std::vector<KernelMatrix> ks;
      for (Channel c : kChannels) ks.push_back(view_kernel(features, c, cfg, subset));
      const DiffusionOperator op = method == Method::KernelProduct ? kernel_product(ks) : kernel_sum(ks);
      const Embedding e = embed(op, cfg.dims, t);
      out.coords = e.coords;
      out.eigenvalues = e.eigenvalues;
      out.view_names = {"fused"};
      out.view_coords = {e.coords};
      break;
    }
    case Method::Kcca: {
      const KernelMatrix k1 = view_kernel(features, cfg.kcca_channels[0], cfg, subset);
      const KernelMatrix k2 = view_kernel(features, cfg.kcca_channels[1], cfg, subset);
      Eigen::VectorXd rho;
      out.coords = kcca_embed(k1, k2, cfg.kcca_gamma, cfg.dims, &rho);
      out.eigenvalues = rho;
      out.view_names = {view_label(cfg.kcca_channels[0]) + view_label(cfg.kcca_channels[1])};
      out.view_coords = {out.coords};
      break;
    }
  }
  return out;
}

MappingResult run_mapping(const std::vector<EventRecord>& events, const RunConfig& cfg) {
  const FeatureSet features = prepare_features(events, cfg);
  if (features.size() < 3) {
    std::string msg = "only " + std::to_string(features.size()) + " of " + std::to_string(events.size()) +
                      " events survived alignment; at least 3 are needed";
    if (!features.dropped.empty()) msg += " (first failure: " + features.dropped.front().message + ")";
    throw RunError(msg);
  }
  return embed_features(features, cfg, cfg.method);
}

// ---- experiments -------------------------------------------------------

std::vector<CurvePoint> classification_curve(const FeatureSet& features, const std::vector<std::string>& labels,
                                             const RunConfig& cfg, const ClassificationOptions& options) {
  if (static_cast<Index>(labels.size()) != features.size())
    throw SizeError("labels are not aligned with the feature set");
  if (options.methods.empty() || options.ks.empty()) throw ConfigError("classification needs methods and K values");

  std::vector<std::vector<Index>> subsets;
  if (options.resample) {
    subsets = balanced_resample(labels, options.resample_multiple, options.trials, options.seed);
  } else {
    subsets.emplace_back();
  }

  std::vector<CurvePoint> curve;
  for (Method method : options.methods) {
    // acc[trial][k]
    std::vector<std::vector<double>> acc;
    for (std::size_t trial = 0; trial < subsets.size(); ++trial) {
      const auto& subset = subsets[trial];
      // A trial that redraws an earlier subset has the same result.
      const auto earlier = std::find(subsets.begin(), subsets.begin() + static_cast<std::ptrdiff_t>(trial), subset);
      if (earlier != subsets.begin() + static_cast<std::ptrdiff_t>(trial)) {
        acc.push_back(acc[static_cast<std::size_t>(earlier - subsets.begin())]);
        continue;
      }
      LabeledEmbedding le;
      const MappingResult mr = embed_features(features, cfg, method, subset);
      le.coords = mr.coords;
      le.event_ids = mr.event_ids;
      if (subset.empty()) {
        le.labels = labels;
      } else {
        for (Index i : subset) le.labels.push_back(labels[static_cast<std::size_t>(i)]);
      }
      acc.push_back(leave_one_out_curve(le, options.ks));
    }
    for (std::size_t q = 0; q < options.ks.size(); ++q) {
      double mean = 0.0;
      for (const auto& a : acc) mean += a[q];
      mean /= static_cast<double>(acc.size());
      double var = 0.0;
      for (const auto& a : acc) var += (a[q] - mean) * (a[q] - mean);
      const double sd = acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1)) : 0.0;
      curve.push_back({options.ks[q], method_name(method), mean, sd});
    }
  }
  return curve;
}

std::vector<LocationEval> location_evaluation(const FeatureSet& features, const Eigen::VectorXd& lat,
                                              const Eigen::VectorXd& lon, const RunConfig& cfg) {
  const Eigen::MatrixXd& x = features.view(cfg.location_channel);
  const Index d = std::max<Index>(2, cfg.dims);
  const std::string suffix = std::string("_") + channel_name(cfg.location_channel);
  const Embedding dm = embed(row_normalize(rbf_kernel_max_min(x, cfg.bandwidth_c)), d, cfg.diffusion_time);
  const PcaModel pca = pca_fit(x, d);
  return {location_correlation(dm.coords, lat, lon, "DM" + suffix),
          location_correlation(pca_project(pca, x), lat, lon, "PCA" + suffix)};
}

AnomalyReport anomaly_screen(const FeatureSet& features, const RunConfig& cfg, Method method) {
  RunConfig c = cfg;
  c.dims = cfg.anomaly_dims;
  const MappingResult mr = embed_features(features, c, method);
  return detect_anomalies(mr.coords, cfg.anomaly_k, cfg.anomaly_threshold_multiple, cfg.anomaly_average);
}

}  // namespace seismap
