#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sidewidth/measure.hpp"
#include "sidewidth/manifest.hpp"

namespace sidewidth {

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  bool operator==(const LonLat&) const = default;
};

/// Local equirectangular approximation: x east, y north, metres.
class LocalFrame {
 public:
  LocalFrame(LonLat origin, double reference_lat_deg);

  Eigen::Vector2d to_metric(LonLat p) const;
  LonLat to_geo(const Eigen::Vector2d& xy) const;

 private:
  LonLat origin_;
  double m_per_deg_lon_;
  double m_per_deg_lat_;
};

struct StreetSegment {
  std::string segment_id;
  std::vector<LonLat> polyline;

  /// Throws Error on fewer than 2 vertices, non-finite coordinates or zero length.
  void validate() const;
  double length_m() const;
};

struct SamplePoint {
  std::string segment_id;
  LonLat position;
  double chainage_m = 0.0;
  double bearing_deg = 0.0;  // clockwise from north, [0, 360)
  std::array<double, 2> headings_deg{};  // bearing + 90, bearing + 270 (mod 360)
};

/// Points at chainage 0, interval, 2 interval, ... strictly below the segment length. The bearing is taken
/// along the chord between chainage -/+ half_window_m, clipped to the segment.
std::vector<SamplePoint> sample_segment(const StreetSegment& segment, double interval_m, double half_window_m = 15.0);

std::vector<SamplePoint> sample_network(const std::vector<StreetSegment>& network, double interval_m,
                                        double half_window_m = 15.0);

/// Keeps the first point per cell of an axis-aligned metric grid, after sorting by (segment_id, chainage).
/// The result is sorted the same way and does not depend on input order.
std::vector<SamplePoint> dedup_grid(std::vector<SamplePoint> points, double cell_m);

/// One width with its network segment; only accepted widths are aggregated.
struct TaggedWidth {
  std::string segment_id;
  double width_m = 0.0;
  bool accepted = false;
};

std::vector<TaggedWidth> tag_measurements(const std::vector<WidthMeasurement>& measurements,
                                          const std::vector<ImageManifestEntry>& entries);

struct SegmentRecord {
  std::string segment_id;
  std::size_t n_measurements = 0;
  double median_width_m = 0.0;
  std::vector<double> widths_m;  // ascending
};

/// Groups accepted widths by segment; records sorted by segment_id.
std::vector<SegmentRecord> aggregate_segments(const std::vector<TaggedWidth>& widths);

struct CoverageReport {
  std::size_t covered = 0;
  std::size_t total = 0;
  long long coverage_tenths = 0;  // percent x 10, rounded half up
  std::optional<double> median_of_medians_m;

  double coverage_pct() const noexcept { return static_cast<double>(coverage_tenths) / 10.0; }
  /// e.g. "38.2"
  std::string coverage_pct_text() const;
};

/// Integer percent x 10 of covered/total, rounded half up.
long long percent_tenths(std::size_t covered, std::size_t total);

/// Throws Error when a record names a segment absent from the network or the network is empty.
CoverageReport coverage_report(const std::vector<SegmentRecord>& records, const std::vector<StreetSegment>& network);

/// FeatureCollection of LineString features with a "segment_id" property.
std::vector<StreetSegment> parse_network_geojson(std::string_view text, const std::string& source = "<network>");
std::vector<StreetSegment> load_network(const std::filesystem::path& path);

/// segment_id,lon,lat,chainage_m,heading_deg; one row per heading.
void write_sample_plan_csv(std::ostream& out, const std::vector<SamplePoint>& points);

/// LineString features with properties segment_id, n_measurements, median_width_m.
std::string records_geojson(const std::vector<SegmentRecord>& records, const std::vector<StreetSegment>& network);

}  // namespace sidewidth
