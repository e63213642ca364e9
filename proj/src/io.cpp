#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include "seismap/pipeline.hpp"

namespace seismap {

namespace fs = std::filesystem;
using nlohmann::json;

std::string event_type_name(EventType t) { return t == EventType::Earthquake ? "earthquake" : "explosion"; }

EventType parse_event_type(const std::string& s) {
  if (s == "earthquake") return EventType::Earthquake;
  if (s == "explosion") return EventType::Explosion;
  throw ConfigError("unknown event type '" + s + "' (expected earthquake or explosion)");
}

void CatalogEntry::validate() const {
  if (event_id.empty()) throw IngestError("catalog row has an empty event_id");
  if (!(latitude >= -90.0 && latitude <= 90.0))
    throw IngestError("event " + event_id + ": latitude " + std::to_string(latitude) + " outside [-90, 90]");
  if (!(longitude >= -180.0 && longitude <= 180.0))
    throw IngestError("event " + event_id + ": longitude " + std::to_string(longitude) + " outside [-180, 180]");
  if (!(fs > 0.0) || !std::isfinite(fs)) throw IngestError("event " + event_id + ": sampling rate must be positive");
  if (n_samples < 0) throw IngestError("event " + event_id + ": negative sample count");
}

void EventRecord::validate() const {
  entry.validate();
  for (Channel c : kChannels) {
    const Waveform& w = channel(c);
    if (w.channel != c) throw IngestError("event " + event_id + ": channel slot holds the wrong component");
    if (w.size() != channels[0].size())
      throw IngestError("event " + event_id + ": channel " + channel_name(c) + " has " + std::to_string(w.size()) +
                        " samples, E has " + std::to_string(channels[0].size()));
    if (w.fs != channels[0].fs) throw IngestError("event " + event_id + ": channels disagree on the sampling rate");
  }
}

// ---- catalog -----------------------------------------------------------

namespace {

CatalogEntry entry_from_json(const json& j) {
  if (!j.is_object()) throw IngestError("catalog rows must be JSON objects");
  CatalogEntry e;
  try {
    e.event_id = j.at("event_id").get<std::string>();
    e.type = parse_event_type(j.at("type").get<std::string>());
    e.latitude = j.at("lat").get<double>();
    e.longitude = j.at("lon").get<double>();
    if (j.contains("cluster") && !j.at("cluster").is_null()) e.cluster = j.at("cluster").get<std::string>();
    e.fs = j.at("fs").get<double>();
    e.n_samples = j.at("n_samples").get<Index>();
    if (j.contains("onset") && !j.at("onset").is_null()) e.onset = j.at("onset").get<Index>();
  } catch (const json::exception& ex) {
    throw IngestError(std::string("malformed catalog row: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw IngestError(std::string("malformed catalog row: ") + ex.what());
  }
  e.validate();
  return e;
}

json entry_to_json(const CatalogEntry& e) {
  json j;
  j["event_id"] = e.event_id;
  j["type"] = event_type_name(e.type);
  j["lat"] = e.latitude;
  j["lon"] = e.longitude;
  j["cluster"] = e.cluster ? json(*e.cluster) : json(nullptr);
  j["fs"] = e.fs;
  j["n_samples"] = e.n_samples;
  if (e.onset) j["onset"] = *e.onset;
  return j;
}

}  // namespace

std::vector<CatalogEntry> read_catalog(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IngestError("cannot open catalog " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw IngestError("catalog " + file.string() + " is not valid JSON: " + ex.what());
  }
  if (!j.is_array()) throw IngestError("catalog " + file.string() + " must hold a JSON array");
  std::vector<CatalogEntry> out;
  std::set<std::string> seen;
  for (const auto& row : j) {
    out.push_back(entry_from_json(row));
    if (!seen.insert(out.back().event_id).second)
      throw IngestError("catalog lists event " + out.back().event_id + " twice");
  }
  return out;
}

void write_catalog(const fs::path& file, const std::vector<CatalogEntry>& entries) {
  json j = json::array();
  for (const auto& e : entries) j.push_back(entry_to_json(e));
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IngestError("cannot write catalog " + file.string());
  out << j.dump(2) << '\n';
}

// ---- raw waveforms -----------------------------------------------------

Eigen::VectorXd read_f32le(const fs::path& file) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw IngestError("cannot open " + file.string());
  const std::streamsize bytes = in.tellg();
  if (bytes % 4 != 0) throw IngestError(file.string() + " size is not a multiple of 4 bytes");
  in.seekg(0);
  std::vector<unsigned char> raw(static_cast<std::size_t>(bytes));
  in.read(reinterpret_cast<char*>(raw.data()), bytes);
  Eigen::VectorXd out(bytes / 4);
  for (Index i = 0; i < out.size(); ++i) {
    const unsigned char* p = raw.data() + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    const float v = std::bit_cast<float>(bits);
    if (!std::isfinite(v)) throw IngestError(file.string() + " contains a non-finite sample at " + std::to_string(i));
    out(i) = static_cast<double>(v);
  }
  return out;
}

void write_f32le(const fs::path& file, const Eigen::VectorXd& samples) {
  std::vector<unsigned char> raw(static_cast<std::size_t>(samples.size()) * 4);
  for (Index i = 0; i < samples.size(); ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(samples(i)));
    for (int b = 0; b < 4; ++b) raw[static_cast<std::size_t>(4 * i + b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IngestError("cannot write " + file.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

// ---- dataset directories -----------------------------------------------

IngestResult ingest(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("data directory " + dir.string() + " does not exist");
  const std::vector<CatalogEntry> catalog = read_catalog(dir / "catalog.json");

  IngestResult result;
  std::set<std::string> catalogued;
  for (const auto& entry : catalog) {
    catalogued.insert(entry.event_id);
    const fs::path event_dir = dir / entry.event_id;
    if (!fs::is_directory(event_dir)) {
      result.issues.push_back({entry.event_id, "missing_waveforms", "catalog row has no waveform directory"});
      continue;
    }
    EventRecord rec;
    rec.event_id = entry.event_id;
    rec.entry = entry;
    try {
      for (Channel c : kChannels) {
        const fs::path file = event_dir / (std::string(1, channel_name(c)) + ".f32le");
        if (!fs::is_regular_file(file))
          throw IngestError(std::string("missing channel ") + channel_name(c));
        Waveform& w = rec.channels[channel_slot(c)];
        w.samples = read_f32le(file);
        w.fs = entry.fs;
        w.channel = c;
        w.event_id = entry.event_id;
        if (w.size() != entry.n_samples)
          throw IngestError(std::string("channel ") + channel_name(c) + " has " + std::to_string(w.size()) +
                            " samples, catalog declares " + std::to_string(entry.n_samples));
      }
      rec.validate();
    } catch (const IngestError& ex) {
      const std::string what = ex.what();
      const std::string kind = what.rfind("missing channel", 0) == 0 ? "missing_channel"
                               : what.find("samples") != std::string::npos ? "length_mismatch"
                                                                           : "invalid_waveform";
      result.issues.push_back({entry.event_id, kind, what});
      continue;
    }
    result.events.push_back(std::move(rec));
  }

  std::vector<std::string> extra;
  for (const auto& item : fs::directory_iterator(dir))
    if (item.is_directory() && !catalogued.count(item.path().filename().string()))
      extra.push_back(item.path().filename().string());
  std::sort(extra.begin(), extra.end());
  for (const auto& id : extra) result.issues.push_back({id, "uncatalogued", "waveform directory has no catalog row"});
  return result;
}

void write_dataset(const fs::path& dir, const std::vector<EventRecord>& events) {
  fs::create_directories(dir);
  std::vector<CatalogEntry> entries;
  for (const auto& e : events) {
    e.validate();
    fs::create_directories(dir / e.event_id);
    for (Channel c : kChannels)
      write_f32le(dir / e.event_id / (std::string(1, channel_name(c)) + ".f32le"), e.channel(c).samples);
    entries.push_back(e.entry);
  }
  write_catalog(dir / "catalog.json", entries);
}

}  // namespace seismap
