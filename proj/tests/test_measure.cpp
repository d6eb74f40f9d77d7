#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "sidewidth/measure.hpp"
#include "sidewidth/pipeline.hpp"
#include "sidewidth/stats.hpp"
#include "sidewidth/synth.hpp"

using namespace sidewidth;

namespace {

std::vector<SemanticClass> column_of(int h, std::initializer_list<std::tuple<int, int, SemanticClass>> runs) {
  std::vector<SemanticClass> col(h, SemanticClass::Other);
  for (const auto& [a, b, c] : runs) {
    for (int v = a; v <= b; ++v) col[v] = c;
  }
  return col;
}

GroundPlane plane_y0() {
  GroundPlane p;
  p.normal = Eigen::Vector3d::UnitY();
  p.offset = 0.0;
  p.inlier_ratio = 1.0;
  return p;
}

// Parallel boundary lines along `along` (in the y = 0 plane), `width` apart along `across`.
std::vector<ColumnSample> parallel_samples(const Eigen::Vector3d& along, const Eigen::Vector3d& across, double width,
                                           int n = 40) {
  std::vector<ColumnSample> out;
  for (int i = 0; i < n; ++i) {
    ColumnSample s;
    s.column = i;
    s.inner_3d = along * (0.1 * i) + across * 3.0;
    s.outer_3d = s.inner_3d + across * width + along * 0.01 * std::sin(i);
    s.valid = true;
    out.push_back(s);
  }
  return out;
}

Scene flat_scene(double width, double noise = 0.0, std::uint64_t seed = 0, double k = 1.0) {
  SceneSpec s;
  s.sidewalk_width_m = width;
  s.camera_pitch_deg = -8.0;
  s.camera_yaw_deg = 5.0;
  s.road_width_m = 4.0;
  s.noise_sigma_frac = noise;
  s.seed = seed;
  s.global_scale = k;
  return generate_scene(s, intrinsics_from_fov(90, 640, 640));
}

}  // namespace

TEST(ColumnSegment, SingleRunAboveRoad) {
  const auto col = column_of(640, {{400, 500, SemanticClass::Sidewalk}, {501, 639, SemanticClass::Road}});
  const auto r = select_column_segment(col);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->inner_row, 500);
  EXPECT_EQ(r->outer_row, 400);
}

TEST(ColumnSegment, LongestRunWins) {
  const auto col = column_of(300, {{10, 29, SemanticClass::Sidewalk}, {100, 179, SemanticClass::Sidewalk}});
  const auto r = select_column_segment(col);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->outer_row, 100);
  EXPECT_EQ(r->inner_row, 179);
}

TEST(ColumnSegment, TieGoesToBottomRun) {
  const auto col = column_of(640, {{100, 150, SemanticClass::Sidewalk}, {400, 450, SemanticClass::Sidewalk}});
  const auto r = select_column_segment(col);
  ASSERT_TRUE(r);
  EXPECT_EQ(std::min(r->inner_row, r->outer_row), 400);
  EXPECT_EQ(std::max(r->inner_row, r->outer_row), 450);
}

TEST(ColumnSegment, RoadAboveMakesTopInner) {
  const auto col = column_of(100, {{0, 39, SemanticClass::Road}, {40, 60, SemanticClass::Sidewalk}});
  const auto r = select_column_segment(col);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->inner_row, 40);
  EXPECT_FALSE(r->inner_is_bottom);
}

TEST(ColumnSegment, NoSidewalk) {
  EXPECT_FALSE(select_column_segment(column_of(50, {{0, 49, SemanticClass::Road}})));
}

TEST(CentralBand, Arithmetic) {
  const ColumnRange a = central_band(640, 0.5);
  EXPECT_EQ(a.first, 160);
  EXPECT_EQ(a.last, 480);  // columns 160..479
  const ColumnRange b = central_band(640, 1.0);
  EXPECT_EQ(b.first, 0);
  EXPECT_EQ(b.last, 640);
  EXPECT_THROW(central_band(640, 0.0), Error);
  EXPECT_THROW(central_band(640, 1.5), Error);
}

TEST(ProjectToPlane, Examples) {
  const GroundPlane p = plane_y0();
  EXPECT_EQ(project_to_plane(Eigen::Vector3d(1, 0, 3), p), Eigen::Vector3d(1, 0, 3));
  EXPECT_EQ(project_to_plane(Eigen::Vector3d(0, 2, 0), p), Eigen::Vector3d(0, 0, 0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    GroundPlane q;
    q.normal = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    q.offset = 5 * g(rng);
    const Eigen::Vector3d x(10 * g(rng), 10 * g(rng), 10 * g(rng));
    EXPECT_NEAR(q.signed_distance(project_to_plane(x, q)), 0.0, 1e-9);
  }
}

TEST(AcrossDirection, ParallelLinesAlongX) {
  const auto samples = parallel_samples(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(), 2.0);
  const DirectionEstimate d = across_direction(samples, plane_y0());
  EXPECT_NEAR(std::abs(d.across.dot(Eigen::Vector3d::UnitZ())), 1.0, 1e-6);
  EXPECT_NEAR(d.across.dot(Eigen::Vector3d::UnitX()), 0.0, 1e-6);
  EXPECT_NEAR(d.across.dot(Eigen::Vector3d::UnitY()), 0.0, 1e-12);
}

TEST(AcrossDirection, RotatesWithConfiguration) {
  const Eigen::Matrix3d R = Eigen::AngleAxisd(30.0 * std::numbers::pi / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const auto base = across_direction(parallel_samples(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(), 2.0),
                                     plane_y0());
  const auto rotated =
      across_direction(parallel_samples(R * Eigen::Vector3d::UnitX(), R * Eigen::Vector3d::UnitZ(), 2.0), plane_y0());
  EXPECT_NEAR((rotated.across - R * base.across).norm(), 0.0, 1e-6);
}

TEST(AcrossDirection, CircularBlobIsAmbiguous) {
  std::vector<ColumnSample> samples;
  for (int i = 0; i < 40; ++i) {
    const double t = 2 * std::numbers::pi * i / 40;
    ColumnSample s;
    s.valid = true;
    s.inner_3d = Eigen::Vector3d(std::cos(t), 0, std::sin(t));
    s.outer_3d = s.inner_3d;
    samples.push_back(s);
  }
  try {
    across_direction(samples, plane_y0());
    FAIL();
  } catch (const Rejected& r) {
    EXPECT_EQ(r.reason(), RejectReason::AmbiguousDirection);
  }
}

TEST(AcrossDirection, TooFewColumns) {
  const auto samples = parallel_samples(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(), 2.0, 10);
  try {
    across_direction(samples, plane_y0());
    FAIL();
  } catch (const Rejected& r) {
    EXPECT_EQ(r.reason(), RejectReason::InsufficientValidColumns);
  }
}

TEST(ColumnWidth, Projections) {
  ColumnSample s;
  s.outer_3d = Eigen::Vector3d(0, 0, 2);
  EXPECT_DOUBLE_EQ(column_width(s, Eigen::Vector3d::UnitZ()), 2.0);
  s.outer_3d = Eigen::Vector3d(3, 0, 0);
  EXPECT_DOUBLE_EQ(column_width(s, Eigen::Vector3d::UnitZ()), 0.0);
  s.outer_3d = Eigen::Vector3d(1, 0, 1);
  EXPECT_DOUBLE_EQ(column_width(s, Eigen::Vector3d::UnitZ()), 1.0);
}

TEST(MeasureWidth, NoiseFreeFlatScene) {
  const Scene sc = flat_scene(2.0);
  const auto cal = scale_factor(2.5, predicted_camera_height(sc.truth.plane, Eigen::Vector3d::Zero()));
  const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, cal, MeasureConfig{});
  ASSERT_TRUE(m.accepted()) << m.detail;
  EXPECT_GE(m.width_m, 1.98);
  EXPECT_LE(m.width_m, 2.02);
  EXPECT_GE(m.n_valid_columns, 20u);
}

TEST(MeasureWidth, OnePercentNoiseMedianError) {
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Scene sc = flat_scene(2.0, 0.01, seed);
    const auto cal = scale_factor(2.5, predicted_camera_height(sc.truth.plane, Eigen::Vector3d::Zero()));
    const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, cal, MeasureConfig{});
    ASSERT_TRUE(m.accepted()) << m.detail;
    errors.push_back(std::abs(m.width_m - 2.0));
  }
  EXPECT_LE(median(errors), 0.10);
}

TEST(MeasureWidth, OccludedBandRejected) {
  SceneSpec s;
  s.occlusion_boxes.push_back({150, 0, 490, 640});
  const Scene sc = generate_scene(s, intrinsics_from_fov(90, 640, 640));
  const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, scale_factor(2.5, 2.5), MeasureConfig{});
  EXPECT_EQ(m.status, MeasureStatus::Rejected);
  EXPECT_EQ(m.reason, RejectReason::InsufficientValidColumns);
}

TEST(MeasureWidth, CameraHeightLinearity) {
  const Scene sc = flat_scene(1.3);
  const double hp = predicted_camera_height(sc.truth.plane, Eigen::Vector3d::Zero());
  const WidthMeasurement base = measure_width(sc.points, sc.mask, sc.truth.plane, scale_factor(2.5, hp), MeasureConfig{});
  ASSERT_TRUE(base.accepted());
  for (double h : {2.0, 2.25, 2.75, 3.0, 5.0}) {
    const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, scale_factor(h, hp), MeasureConfig{});
    EXPECT_NEAR(m.width_m, base.width_m * h / 2.5, 1e-12 * base.width_m);
  }
}

TEST(MeasureWidth, GlobalScaleInvariance) {
  PipelineConfig cfg;
  ImageManifestEntry e;
  e.image_id = "s";
  e.fov_deg = 90.0;
  std::vector<double> widths;
  for (double k : {0.1, 1.0, 10.0}) {
    Scene sc = flat_scene(2.2, 0.0, 0, k);
    const ImageData data{std::move(sc.points), std::move(sc.mask)};
    const WidthMeasurement m = measure_image(e, data, cfg);
    ASSERT_TRUE(m.accepted()) << m.detail;
    widths.push_back(m.width_m);
  }
  EXPECT_NEAR(widths[0], widths[1], 1e-6 * widths[1]);
  EXPECT_NEAR(widths[2], widths[1], 1e-6 * widths[1]);
}

TEST(MeasureWidth, RangeGate) {
  const Scene sc = flat_scene(2.0);
  MeasureConfig cfg;
  cfg.max_width_m = 1.5;
  const auto cal = scale_factor(2.5, 2.5);
  const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, cal, cfg);
  EXPECT_EQ(m.reason, RejectReason::WidthOutOfRange);
  EXPECT_GT(m.width_m, 1.5);
}

TEST(MeasureWidth, LowInlierRatioRejected) {
  const Scene sc = flat_scene(2.0);
  GroundPlane p = sc.truth.plane;
  p.inlier_ratio = 0.1;
  const WidthMeasurement m = measure_width(sc.points, sc.mask, p, scale_factor(2.5, 2.5), MeasureConfig{});
  EXPECT_EQ(m.reason, RejectReason::LowInlierRatio);
}

TEST(MeasureWidth, PixelBoundaryModeIsBiasedLow) {
  const Scene sc = flat_scene(2.0);
  MeasureConfig cfg;
  cfg.boundary = BoundaryMode::Pixel;
  const WidthMeasurement m = measure_width(sc.points, sc.mask, sc.truth.plane, scale_factor(2.5, 2.5), cfg);
  ASSERT_TRUE(m.accepted());
  EXPECT_LT(m.width_m, 2.0);
}

TEST(MedianAggregation, PermutationAndMinorityCorruption) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(2.0, 0.02);
  std::vector<double> w(101);
  for (auto& x : w) x = g(rng);
  const double med = median(w);
  auto shuffled = w;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(median(shuffled), med);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  for (std::size_t i = 0; i < 50; ++i) shuffled[i] = 1e6 * (i % 2 ? 1 : -1);
  const double corrupted = median(shuffled);
  EXPECT_GE(corrupted, *lo);
  EXPECT_LE(corrupted, *hi);
}

TEST(MeasureConfig, Validation) {
  MeasureConfig c;
  c.band_fraction = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = MeasureConfig{};
  c.min_width_m = 9.0;
  EXPECT_THROW(c.validate(), Error);
}
