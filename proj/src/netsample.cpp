#include "sidewidth/netsample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sidewidth/error.hpp"
#include "sidewidth/stats.hpp"

namespace sidewidth {
namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMetresPerDegLat = kEarthRadiusM * std::numbers::pi / 180.0;

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w == 0.0 ? 0.0 : w;  // no negative zero
}

LocalFrame centroid_frame(const std::vector<LonLat>& pts) {
  LonLat c;
  for (const auto& p : pts) {
    c.lon += p.lon;
    c.lat += p.lat;
  }
  c.lon /= static_cast<double>(pts.size());
  c.lat /= static_cast<double>(pts.size());
  return LocalFrame(c, c.lat);
}

struct Polyline {
  std::vector<Eigen::Vector2d> xy;
  std::vector<double> cumulative;  // chainage of each vertex

  double length() const { return cumulative.back(); }

  Eigen::Vector2d at(double chainage) const {
    chainage = std::clamp(chainage, 0.0, length());
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), chainage);
    std::size_t i = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
    if (i + 1 >= xy.size()) return xy.back();
    const double seg = cumulative[i + 1] - cumulative[i];
    if (seg <= 0.0) return xy[i];
    return xy[i] + (xy[i + 1] - xy[i]) * ((chainage - cumulative[i]) / seg);
  }
};

Polyline to_metric(const std::vector<LonLat>& pts, const LocalFrame& frame) {
  Polyline p;
  p.cumulative.push_back(0.0);
  for (const auto& v : pts) {
    p.xy.push_back(frame.to_metric(v));
    if (p.xy.size() > 1) p.cumulative.push_back(p.cumulative.back() + (p.xy.back() - p.xy[p.xy.size() - 2]).norm());
  }
  return p;
}

bool sort_before(const SamplePoint& a, const SamplePoint& b) {
  if (a.segment_id != b.segment_id) return a.segment_id < b.segment_id;
  if (a.chainage_m != b.chainage_m) return a.chainage_m < b.chainage_m;
  if (a.position.lon != b.position.lon) return a.position.lon < b.position.lon;
  return a.position.lat < b.position.lat;
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

LocalFrame::LocalFrame(LonLat origin, double reference_lat_deg)
    : origin_(origin),
      m_per_deg_lon_(kMetresPerDegLat * std::cos(reference_lat_deg * std::numbers::pi / 180.0)),
      m_per_deg_lat_(kMetresPerDegLat) {}

Eigen::Vector2d LocalFrame::to_metric(LonLat p) const {
  return {(p.lon - origin_.lon) * m_per_deg_lon_, (p.lat - origin_.lat) * m_per_deg_lat_};
}

LonLat LocalFrame::to_geo(const Eigen::Vector2d& xy) const {
  return {origin_.lon + xy.x() / m_per_deg_lon_, origin_.lat + xy.y() / m_per_deg_lat_};
}

void StreetSegment::validate() const {
  if (polyline.size() < 2) throw Error("segment '" + segment_id + "': fewer than 2 vertices");
  for (const auto& p : polyline) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat) || std::abs(p.lat) > 90.0) {
      throw Error("segment '" + segment_id + "': invalid coordinate");
    }
  }
  if (!(length_m() > 0.0)) throw Error("segment '" + segment_id + "': degenerate zero-length segment");
}

double StreetSegment::length_m() const {
  if (polyline.size() < 2) return 0.0;
  return to_metric(polyline, centroid_frame(polyline)).length();
}

std::vector<SamplePoint> sample_segment(const StreetSegment& segment, double interval_m, double half_window_m) {
  if (!(interval_m > 0.0)) throw Error("sample interval must be positive");
  if (!(half_window_m > 0.0)) throw Error("bearing window must be positive");
  segment.validate();
  const LocalFrame frame = centroid_frame(segment.polyline);
  const Polyline line = to_metric(segment.polyline, frame);
  const double length = line.length();

  std::vector<SamplePoint> out;
  for (std::size_t k = 0;; ++k) {
    const double c = static_cast<double>(k) * interval_m;
    if (!(c < length)) break;
    const Eigen::Vector2d chord = line.at(c + half_window_m) - line.at(c - half_window_m);
    SamplePoint p;
    p.segment_id = segment.segment_id;
    p.position = frame.to_geo(line.at(c));
    p.chainage_m = c;
    p.bearing_deg = wrap_degrees(std::atan2(chord.x(), chord.y()) * 180.0 / std::numbers::pi);
    p.headings_deg = {wrap_degrees(p.bearing_deg + 90.0), wrap_degrees(p.bearing_deg + 270.0)};
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SamplePoint> sample_network(const std::vector<StreetSegment>& network, double interval_m,
                                        double half_window_m) {
  std::vector<SamplePoint> out;
  for (const auto& s : network) {
    auto pts = sample_segment(s, interval_m, half_window_m);
    out.insert(out.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
  }
  return out;
}

std::vector<SamplePoint> dedup_grid(std::vector<SamplePoint> points, double cell_m) {
  if (!(cell_m > 0.0)) throw Error("dedup cell size must be positive");
  if (points.empty()) return points;
  std::sort(points.begin(), points.end(), sort_before);

  // Frame anchored at the bounding box so the grid does not depend on point order.
  LonLat lo{points[0].position.lon, points[0].position.lat};
  double lat_hi = lo.lat;
  for (const auto& p : points) {
    lo.lon = std::min(lo.lon, p.position.lon);
    lo.lat = std::min(lo.lat, p.position.lat);
    lat_hi = std::max(lat_hi, p.position.lat);
  }
  const LocalFrame frame(lo, 0.5 * (lo.lat + lat_hi));

  std::set<std::pair<long long, long long>> seen;
  std::vector<SamplePoint> kept;
  for (auto& p : points) {
    const Eigen::Vector2d xy = frame.to_metric(p.position);
    const auto cell = std::make_pair(static_cast<long long>(std::floor(xy.x() / cell_m)),
                                     static_cast<long long>(std::floor(xy.y() / cell_m)));
    if (seen.insert(cell).second) kept.push_back(std::move(p));
  }
  return kept;
}

std::vector<TaggedWidth> tag_measurements(const std::vector<WidthMeasurement>& measurements,
                                          const std::vector<ImageManifestEntry>& entries) {
  std::map<std::string, std::string> segment_of;
  for (const auto& e : entries) {
    if (e.segment_id) segment_of.emplace(e.image_id, *e.segment_id);
  }
  std::vector<TaggedWidth> out;
  for (const auto& m : measurements) {
    const auto it = segment_of.find(m.image_id);
    if (it == segment_of.end()) continue;
    out.push_back({it->second, m.width_m, m.accepted()});
  }
  return out;
}

std::vector<SegmentRecord> aggregate_segments(const std::vector<TaggedWidth>& widths) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& w : widths) {
    if (w.accepted) groups[w.segment_id].push_back(w.width_m);
  }
  std::vector<SegmentRecord> out;
  for (auto& [id, ws] : groups) {
    std::sort(ws.begin(), ws.end());
    SegmentRecord r;
    r.segment_id = id;
    r.n_measurements = ws.size();
    r.median_width_m = median(ws);
    r.widths_m = std::move(ws);
    out.push_back(std::move(r));
  }
  return out;
}

long long percent_tenths(std::size_t covered, std::size_t total) {
  if (total == 0) throw Error("coverage: empty network");
  const auto c = static_cast<long long>(covered);
  const auto t = static_cast<long long>(total);
  return (2000 * c + t) / (2 * t);
}

std::string CoverageReport::coverage_pct_text() const {
  return std::to_string(coverage_tenths / 10) + "." + std::to_string(coverage_tenths % 10);
}

CoverageReport coverage_report(const std::vector<SegmentRecord>& records, const std::vector<StreetSegment>& network) {
  std::set<std::string> ids;
  for (const auto& s : network) ids.insert(s.segment_id);
  std::set<std::string> covered;
  std::vector<double> medians;
  for (const auto& r : records) {
    if (!ids.count(r.segment_id)) throw Error("coverage: segment '" + r.segment_id + "' is not in the network");
    if (covered.insert(r.segment_id).second) medians.push_back(r.median_width_m);
  }
  CoverageReport rep;
  rep.covered = covered.size();
  rep.total = ids.size();
  rep.coverage_tenths = percent_tenths(rep.covered, rep.total);
  if (!medians.empty()) rep.median_of_medians_m = median(medians);
  return rep;
}

std::vector<StreetSegment> parse_network_geojson(std::string_view text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto nl = text.rfind('\n', upto > 0 ? upto - 1 : 0);
    const std::size_t col = nl == std::string_view::npos || upto == 0 ? upto + 1 : upto - nl;
    throw FormatError(source, "parse error at line " + std::to_string(line) + ", column " + std::to_string(col));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array()) {
    throw FormatError(source, "expected a GeoJSON FeatureCollection");
  }
  std::vector<StreetSegment> out;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& f : doc["features"]) {
    const std::string where = "feature " + std::to_string(index++);
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object()) {
      throw FormatError(source, where + ": missing geometry");
    }
    const auto& g = f["geometry"];
    if (g.value("type", "") != "LineString") throw FormatError(source, where + ": geometry must be a LineString");
    const auto props = f.value("properties", nlohmann::json::object());
    if (!props.is_object() || !props.contains("segment_id")) throw FormatError(source, where + ": missing segment_id");
    StreetSegment seg;
    const auto& id = props["segment_id"];
    if (id.is_string()) {
      seg.segment_id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      seg.segment_id = std::to_string(id.get<long long>());
    } else {
      throw FormatError(source, where + ": segment_id must be a string or integer");
    }
    if (!seen.insert(seg.segment_id).second) throw FormatError(source, "duplicate segment_id '" + seg.segment_id + "'");
    if (!g.contains("coordinates") || !g["coordinates"].is_array()) {
      throw FormatError(source, where + ": missing coordinates");
    }
    for (const auto& c : g["coordinates"]) {
      if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
        throw FormatError(source, where + ": coordinates must be [lon, lat] pairs");
      }
      seg.polyline.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    try {
      seg.validate();
    } catch (const Error& e) {
      throw FormatError(source, e.what());
    }
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<StreetSegment> load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network_geojson(ss.str(), path.string());
}

void write_sample_plan_csv(std::ostream& out, const std::vector<SamplePoint>& points) {
  out << "segment_id,lon,lat,chainage_m,heading_deg\n";
  for (const auto& p : points) {
    for (double h : p.headings_deg) {
      out << p.segment_id << ',' << fmt("%.7f", p.position.lon) << ',' << fmt("%.7f", p.position.lat) << ','
          << fmt("%.2f", p.chainage_m) << ',' << fmt("%.2f", h) << '\n';
    }
  }
}

std::string records_geojson(const std::vector<SegmentRecord>& records, const std::vector<StreetSegment>& network) {
  std::map<std::string, const StreetSegment*> by_id;
  for (const auto& s : network) by_id.emplace(s.segment_id, &s);
  nlohmann::json features = nlohmann::json::array();
  for (const auto& r : records) {
    const auto it = by_id.find(r.segment_id);
    if (it == by_id.end()) throw Error("segment '" + r.segment_id + "' is not in the network");
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : it->second->polyline) coords.push_back({p.lon, p.lat});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties",
                         {{"segment_id", r.segment_id},
                          {"n_measurements", r.n_measurements},
                          {"median_width_m", r.median_width_m}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(2) + "\n";
}

}  // namespace sidewidth
