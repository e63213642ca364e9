#include <cstdio>
#include <ostream>

#include "seismap/pipeline.hpp"

namespace seismap {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_embedding_csv(std::ostream& out, const MappingResult& mapping) {
  const Index d = mapping.view_coords.empty() ? 0 : mapping.view_coords.front().cols();
  out << "event_id,view";
  for (Index c = 0; c < d; ++c) out << ",coord_" << c + 1;
  out << '\n';
  out << "#eigenvalues,";
  for (Index c = 0; c < mapping.eigenvalues.size(); ++c) out << ',' << format_double(mapping.eigenvalues(c));
  out << '\n';
  for (std::size_t v = 0; v < mapping.view_coords.size(); ++v) {
    const Eigen::MatrixXd& block = mapping.view_coords[v];
    for (Index i = 0; i < block.rows(); ++i) {
      out << mapping.event_ids[static_cast<std::size_t>(i)] << ',' << mapping.view_names[v];
      for (Index c = 0; c < block.cols(); ++c) out << ',' << format_double(block(i, c));
      out << '\n';
    }
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "K,method,mean_accuracy,std\n";
  for (const auto& p : curve)
    out << p.k << ',' << p.method << ',' << format_double(p.mean_accuracy) << ',' << format_double(p.std_accuracy)
        << '\n';
}

void write_anomaly_csv(std::ostream& out, const std::vector<std::string>& event_ids, const AnomalyReport& report) {
  if (static_cast<Index>(event_ids.size()) != report.avg_knn_distance.size())
    throw SizeError("anomaly report is not aligned with the event list");
  std::vector<bool> flagged(event_ids.size(), false);
  for (Index i : report.flagged) flagged[static_cast<std::size_t>(i)] = true;
  out << "event_id,avg_knn_distance,flagged\n";
  for (std::size_t i = 0; i < event_ids.size(); ++i)
    out << event_ids[i] << ',' << format_double(report.avg_knn_distance(static_cast<Index>(i))) << ','
        << (flagged[i] ? 1 : 0) << '\n';
}

void write_location_csv(std::ostream& out, const std::vector<LocationEval>& rows) {
  out << "method,pearson_lat,pearson_lon,swapped\n";
  for (const auto& r : rows)
    out << r.method << ',' << format_double(r.pearson_lat) << ',' << format_double(r.pearson_lon) << ','
        << (r.swapped ? 1 : 0) << '\n';
}

void write_sonogram_csv(std::ostream& out, const Sonogram& sonogram) {
  out << "band";
  for (Index t = 0; t < sonogram.values.cols(); ++t) out << ",t_" << t;
  out << '\n';
  for (Index k = 0; k < sonogram.values.rows(); ++k) {
    out << k + 1;
    for (Index t = 0; t < sonogram.values.cols(); ++t) out << ',' << format_double(sonogram.values(k, t));
    out << '\n';
  }
}

}  // namespace seismap
