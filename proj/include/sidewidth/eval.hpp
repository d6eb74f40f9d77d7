#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sidewidth/config.hpp"
#include "sidewidth/pipeline.hpp"

namespace sidewidth {

struct MetricsReport {
  double mae_m = 0.0;
  double rmse_m = 0.0;
  double bias_m = 0.0;  // mean(pred - truth)
  double frac_025 = 0.0;  // |error| < 0.25 m
  double frac_050 = 0.0;  // |error| < 0.50 m
  std::size_t n_evaluated = 0;
  std::size_t n_rejected = 0;
};

struct WidthPair {
  double pred_m = 0.0;
  double truth_m = 0.0;
};

/// Throws Error on empty or non-finite input.
MetricsReport compute_metrics(std::span<const WidthPair> pairs);

/// Reference width per image id.
using ReferenceWidths = std::map<std::string, double>;

/// Reference widths of the entries that carry one.
ReferenceWidths reference_widths(const std::vector<ImageManifestEntry>& entries);

/// Metrics over accepted measurements that have a reference; every other measurement counts as rejected.
/// Throws Error("no ground truth") when `references` is empty. With nothing accepted the error metrics are NaN.
MetricsReport evaluate(const std::vector<WidthMeasurement>& measurements, const ReferenceWidths& references);

enum class AblationVariant { Full, NoScaleCalibration, PinholeOnly, FullImageWidth };

inline constexpr AblationVariant kAllAblationVariants[] = {AblationVariant::Full, AblationVariant::NoScaleCalibration,
                                                           AblationVariant::PinholeOnly,
                                                           AblationVariant::FullImageWidth};

std::string_view to_string(AblationVariant variant) noexcept;
AblationVariant parse_ablation_variant(std::string_view name);
RunOptions ablation_options(AblationVariant variant);

MetricsReport run_ablation(const ImageSource& source, const PipelineConfig& config, AblationVariant variant);

/// Measurement recomputed at camera height `h_cam_m` by rescaling `base` (measured at `base_h_cam_m`);
/// the width range and dispersion gates are re-applied.
WidthMeasurement rescale_measurement(const WidthMeasurement& base, double base_h_cam_m, double h_cam_m,
                                     const MeasureConfig& config);

struct SweepPoint {
  double h_cam_m = 0.0;
  MetricsReport report;
  std::vector<WidthMeasurement> measurements;
};

/// Measures once at each image's resolved camera height, then rescales to every height in `heights`.
std::vector<SweepPoint> sweep_camera_height(const ImageSource& source, const PipelineConfig& config,
                                            const std::vector<double>& heights);

enum class GeometrySource { PointMap, DepthMap };

std::string_view to_string(GeometrySource source) noexcept;

struct ProtocolSpec {
  int category = 3;
  CalibrationMode calibration = CalibrationMode::CameraHeight;
  GeometrySource geometry_source = GeometrySource::PointMap;

  /// Category 1: native scale (point map or depth); 2: depth + camera height; 3: point map + camera height.
  static ProtocolSpec for_category(int category, GeometrySource source);
  void validate() const;
};

/// Shared downstream pipeline; only the geometry source and calibration differ. Throws Error
/// ("wrong geometry kind ...") when an image's geometry does not match the protocol.
std::vector<WidthMeasurement> run_protocol_measurements(const ImageSource& source, const PipelineConfig& config,
                                                        const ProtocolSpec& protocol);
MetricsReport run_protocol(const ImageSource& source, const PipelineConfig& config, const ProtocolSpec& protocol);

}  // namespace sidewidth
