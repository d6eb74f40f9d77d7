#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sidewidth/error.hpp"
#include "sidewidth/netsample.hpp"

using namespace sidewidth;

namespace {

constexpr double kMPerDegLat = 6371008.8 * M_PI / 180.0;

// Straight segment from (lon, lat) heading north for `metres`.
StreetSegment north(const std::string& id, double lon, double lat, double metres) {
  return {id, {{lon, lat}, {lon, lat + metres / kMPerDegLat}}};
}

StreetSegment east(const std::string& id, double lon, double lat, double metres) {
  const double m_lon = kMPerDegLat * std::cos(lat * M_PI / 180.0);
  return {id, {{lon, lat}, {lon + metres / m_lon, lat}}};
}

SamplePoint at(const std::string& id, double chainage, LonLat p) {
  SamplePoint s;
  s.segment_id = id;
  s.chainage_m = chainage;
  s.position = p;
  return s;
}

std::vector<SegmentRecord> fake_records(std::size_t n) {
  std::vector<SegmentRecord> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = {"s" + std::to_string(i), 1, 2.0, {2.0}};
  return r;
}

std::vector<StreetSegment> fake_network(std::size_t n) {
  std::vector<StreetSegment> net;
  for (std::size_t i = 0; i < n; ++i) net.push_back(north("s" + std::to_string(i), -77.0 + 0.001 * i, 38.9, 50));
  return net;
}

}  // namespace

TEST(LocalFrame, RoundTrip) {
  const LocalFrame f({-77.03, 38.9}, 38.9);
  const LonLat p{-77.0291, 38.9012};
  const LonLat back = f.to_geo(f.to_metric(p));
  EXPECT_NEAR(back.lon, p.lon, 1e-12);
  EXPECT_NEAR(back.lat, p.lat, 1e-12);
  EXPECT_NEAR(f.to_metric({-77.03, 38.9 + 1.0 / kMPerDegLat}).y(), 1.0, 1e-9);
}

TEST(Sample, HundredMetresAtThirty) {
  const auto pts = sample_segment(north("a", -77.03, 38.9, 100.0), 30.0);
  ASSERT_EQ(pts.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(pts[i].chainage_m, 30.0 * i, 1e-9);
}

TEST(Sample, DueNorthBearing) {
  for (const auto& p : sample_segment(north("a", -77.03, 38.9, 100.0), 30.0)) {
    EXPECT_NEAR(p.bearing_deg, 0.0, 1e-6);
    EXPECT_NEAR(p.headings_deg[0], 90.0, 1e-6);
    EXPECT_NEAR(p.headings_deg[1], 270.0, 1e-6);
  }
  for (const auto& p : sample_segment(east("b", -77.03, 38.9, 100.0), 30.0)) EXPECT_NEAR(p.bearing_deg, 90.0, 1e-6);
}

TEST(Sample, ShortSegmentOnePoint) {
  const auto pts = sample_segment(north("a", -77.03, 38.9, 20.0), 30.0);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].chainage_m, 0.0);
  EXPECT_EQ(pts[0].position, (LonLat{-77.03, 38.9}));
}

TEST(Sample, CountRule) {
  for (double len : {1.0, 29.9, 30.0, 30.1, 59.99, 60.0, 241.0}) {
    const auto n = sample_segment(north("a", 10.0, 50.0, len), 30.0).size();
    EXPECT_EQ(n, static_cast<std::size_t>(std::floor((len - 1e-6) / 30.0)) + 1) << len;
  }
}

TEST(Sample, HeadingsPerpendicularOnBentPolyline) {
  const StreetSegment s{"bent", {{-77.03, 38.9}, {-77.03, 38.9005}, {-77.0295, 38.9008}, {-77.029, 38.9008}}};
  for (const auto& p : sample_segment(s, 10.0)) {
    EXPECT_GE(p.bearing_deg, 0.0);
    EXPECT_LT(p.bearing_deg, 360.0);
    EXPECT_NEAR(std::fmod(p.headings_deg[0] - p.bearing_deg + 360.0, 360.0), 90.0, 1e-9);
    EXPECT_NEAR(std::fmod(p.headings_deg[1] - p.bearing_deg + 360.0, 360.0), 270.0, 1e-9);
  }
}

TEST(Sample, DegenerateSegment) {
  EXPECT_THROW(sample_segment({"z", {{1.0, 2.0}, {1.0, 2.0}}}, 30.0), Error);
  EXPECT_THROW(sample_segment({"z", {{1.0, 2.0}}}, 30.0), Error);
  EXPECT_THROW(sample_segment(north("a", 0, 0, 10), 0.0), Error);
}

TEST(Dedup, NearPointsCollapse) {
  const double d5 = 5.0 / kMPerDegLat, d50 = 50.0 / kMPerDegLat;
  const auto near = dedup_grid({at("a", 0, {0.0, 0.0 + 1e-7}), at("a", 5, {0.0, 1e-7 + d5})}, 20.0);
  ASSERT_EQ(near.size(), 1u);
  EXPECT_EQ(near[0].chainage_m, 0.0);
  EXPECT_EQ(dedup_grid({at("a", 0, {0.0, 0.0}), at("a", 50, {0.0, d50})}, 20.0).size(), 2u);
  EXPECT_TRUE(dedup_grid({}, 20.0).empty());
}

TEST(Dedup, SubsetAndPermutationInvariant) {
  std::vector<StreetSegment> net;
  for (int i = 0; i < 6; ++i) net.push_back(north("n" + std::to_string(i), -77.03 + 0.0001 * i, 38.9, 150));
  for (int i = 0; i < 4; ++i) net.push_back(east("e" + std::to_string(i), -77.031, 38.9 + 0.0002 * i, 120));
  const auto pts = sample_network(net, 10.0);
  const auto ref = dedup_grid(pts, 20.0);
  EXPECT_LT(ref.size(), pts.size());
  for (const auto& r : ref) {
    EXPECT_TRUE(std::any_of(pts.begin(), pts.end(), [&](const SamplePoint& p) {
      return p.segment_id == r.segment_id && p.chainage_m == r.chainage_m;
    }));
  }
  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto out = dedup_grid(shuffled, 20.0);
    ASSERT_EQ(out.size(), ref.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      EXPECT_EQ(out[i].segment_id, ref[i].segment_id);
      EXPECT_EQ(out[i].chainage_m, ref[i].chainage_m);
    }
  }
}

TEST(Aggregate, MedianPerSegment) {
  const auto recs = aggregate_segments({{"a", 2.0, true}, {"a", 3.0, true}, {"a", 2.5, true}});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].median_width_m, 2.5);
  EXPECT_EQ(recs[0].n_measurements, 3u);
  EXPECT_EQ(recs[0].widths_m, (std::vector<double>{2.0, 2.5, 3.0}));
}

TEST(Aggregate, RejectedExcludedAndGroupsSorted) {
  const auto recs = aggregate_segments(
      {{"c", 1.0, true}, {"a", 2.0, true}, {"b", 9.0, false}, {"b", 1.5, true}, {"a", 4.0, true}, {"d", 3.0, false}});
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0].segment_id, "a");
  EXPECT_EQ(recs[0].median_width_m, 3.0);
  EXPECT_EQ(recs[1].segment_id, "b");
  EXPECT_EQ(recs[1].n_measurements, 1u);
  EXPECT_EQ(recs[1].median_width_m, 1.5);
  EXPECT_EQ(recs[2].segment_id, "c");
}

TEST(Aggregate, OrderAndDuplicationInvariant) {
  std::vector<TaggedWidth> w{{"a", 1.1, true}, {"a", 1.9, true}, {"a", 1.4, true}, {"a", 2.2, true}};
  const double m = aggregate_segments(w)[0].median_width_m;
  std::reverse(w.begin(), w.end());
  EXPECT_EQ(aggregate_segments(w)[0].median_width_m, m);
  auto doubled = w;
  doubled.insert(doubled.end(), w.begin(), w.end());
  EXPECT_EQ(aggregate_segments(doubled)[0].median_width_m, m);
}

TEST(Coverage, TableArithmetic) {
  EXPECT_EQ(coverage_report(fake_records(176), fake_network(461)).coverage_pct_text(), "38.2");
  EXPECT_EQ(coverage_report(fake_records(148), fake_network(1958)).coverage_pct_text(), "7.6");
  EXPECT_EQ(coverage_report(fake_records(2), fake_network(3)).coverage_pct_text(), "66.7");
  EXPECT_EQ(percent_tenths(1, 8), 125);   // 12.5
  EXPECT_EQ(percent_tenths(1, 16), 63);   // 6.25 -> half up
  EXPECT_EQ(percent_tenths(1, 2000), 1);  // 0.05 -> half up
}

TEST(Coverage, ZeroRecords) {
  const CoverageReport r = coverage_report({}, fake_network(3));
  EXPECT_EQ(r.covered, 0u);
  EXPECT_EQ(r.coverage_pct_text(), "0.0");
  EXPECT_FALSE(r.median_of_medians_m);
}

TEST(Coverage, Errors) {
  EXPECT_THROW(coverage_report(fake_records(1), {}), Error);
  std::vector<SegmentRecord> stray{{"zz", 1, 2.0, {2.0}}};
  EXPECT_THROW(coverage_report(stray, fake_network(2)), Error);
}

TEST(Coverage, MedianOfMedians) {
  const std::vector<SegmentRecord> recs{{"s0", 1, 1.0, {1.0}}, {"s1", 1, 3.0, {3.0}}, {"s2", 2, 2.0, {1.0, 3.0}}};
  EXPECT_EQ(*coverage_report(recs, fake_network(4)).median_of_medians_m, 2.0);
}

TEST(GeoJson, ParsesNetwork) {
  const auto net = parse_network_geojson(R"({"type": "FeatureCollection", "features": [
    {"type": "Feature", "properties": {"segment_id": "w1"},
     "geometry": {"type": "LineString", "coordinates": [[-77.0, 38.9], [-77.0, 38.901]]}},
    {"type": "Feature", "properties": {"segment_id": 42},
     "geometry": {"type": "LineString", "coordinates": [[-77.0, 38.9], [-77.001, 38.9]]}}]})");
  ASSERT_EQ(net.size(), 2u);
  EXPECT_EQ(net[0].segment_id, "w1");
  EXPECT_EQ(net[1].segment_id, "42");
  EXPECT_EQ(net[1].polyline[1], (LonLat{-77.001, 38.9}));
}

TEST(GeoJson, MalformedReportsLineAndColumn) {
  try {
    parse_network_geojson("{\"type\": \"FeatureCollection\",\n  \"features\": [\n   {,}\n]}", "net.geojson");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("net.geojson"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
  }
}

TEST(GeoJson, StructuralErrors) {
  EXPECT_THROW(parse_network_geojson(R"({"type": "Feature"})"), Error);
  EXPECT_THROW(parse_network_geojson(R"({"type": "FeatureCollection", "features": [{"type": "Feature",
      "properties": {}, "geometry": {"type": "LineString", "coordinates": [[0,0],[0,1]]}}]})"),
               Error);
  const std::string dup = R"({"type": "FeatureCollection", "features": [
    {"type": "Feature", "properties": {"segment_id": "a"}, "geometry": {"type": "LineString", "coordinates": [[0,0],[0,1]]}},
    {"type": "Feature", "properties": {"segment_id": "a"}, "geometry": {"type": "LineString", "coordinates": [[0,0],[1,0]]}}]})";
  EXPECT_THROW(parse_network_geojson(dup), Error);
}

TEST(Plan, CsvRowsPerHeading) {
  std::ostringstream out;
  write_sample_plan_csv(out, sample_segment(north("a", -77.03, 38.9, 40.0), 30.0));
  const std::string csv = out.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "segment_id,lon,lat,chainage_m,heading_deg");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find("a,-77.0300000,38.9000000,0.00,90.00\n"), std::string::npos) << csv;
}
