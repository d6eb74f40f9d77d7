#include "sidewidth/pipeline.hpp"

#include "sidewidth/parallel.hpp"
#include "sidewidth/stats.hpp"

namespace sidewidth {

CameraModel camera_for(const ImageManifestEntry& entry, int width, int height, const PipelineConfig& config) {
  const Eigen::Vector3d centre = entry.camera_centre.value_or(Eigen::Vector3d::Zero());
  if (entry.intrinsics) return camera_from_intrinsics(*entry.intrinsics, width, height, centre);
  CameraModel cam = intrinsics_from_fov(entry.fov_deg.value_or(config.calibration.fov_deg), width, height);
  cam.centre = centre;
  return cam;
}

double resolve_camera_height(const ImageManifestEntry& entry, const PipelineConfig& config, const RunOptions& options) {
  if (options.h_cam_override) return *options.h_cam_override;
  return entry.camera_height_m.value_or(config.calibration.h_cam_m);
}

std::vector<Eigen::Vector3d> ground_support_points(const PointMap& points, const SemanticMask& mask) {
  require_same_dimensions(mask, points.width(), points.height(), "ground support");
  std::vector<Eigen::Vector3d> out;
  for (int v = 0; v < points.height(); ++v) {
    for (int u = 0; u < points.width(); ++u) {
      const SemanticClass c = mask.at(u, v);
      if ((c == SemanticClass::Road || c == SemanticClass::Sidewalk) && points.valid(u, v))
        out.push_back(points.point(u, v));
    }
  }
  return out;
}

WidthMeasurement measure_image(const ImageManifestEntry& entry, const ImageData& data, const PipelineConfig& config,
                               const RunOptions& options) {
  WidthMeasurement failed;
  failed.image_id = entry.image_id;
  try {
    const int w = data.mask.width();
    const int h = data.mask.height();
    const CameraModel cam = camera_for(entry, w, h, config);
    const double h_cam = resolve_camera_height(entry, config, options);

    PointMap points;
    if (options.flat_pinhole) {
      points = flat_ground_point_map(cam, h_cam);
    } else if (const auto* pm = std::get_if<PointMap>(&data.geometry)) {
      points = *pm;
    } else {
      points = unproject_depth(std::get<DepthMap>(data.geometry), cam);
    }
    require_same_dimensions(data.mask, points.width(), points.height(), entry.image_id);

    const std::size_t n = data.mask.pixel_count();
    const SemanticMask mask =
        postprocess_mask(data.mask, config.mask.min_region_px(n), config.mask.max_hole_px(n));
    const SupportCheck support = check_support(mask, config.mask.min_sidewalk_frac, config.mask.min_road_frac);
    if (!support.accepted) {
      throw Rejected(*support.reason, "sidewalk fraction " + std::to_string(support.sidewalk_frac) +
                                          ", road fraction " + std::to_string(support.road_frac));
    }

    RansacConfig ransac = config.ransac;
    ransac.seed = derive_seed(config.seed, entry.image_id);
    const GroundPlane plane = fit_ground_plane(ground_support_points(points, mask), ransac, cam.centre);
    const double h_pred = predicted_camera_height(plane, cam.centre);
    const ScaleCalibration calibration =
        options.calibration == CalibrationMode::Native ? native_scale(h_pred) : scale_factor(h_cam, h_pred);

    MeasureConfig measure = config.measure;
    if (options.band_fraction) measure.band_fraction = *options.band_fraction;
    WidthMeasurement m = measure_width(points, mask, plane, calibration, measure);
    m.image_id = entry.image_id;
    return m;
  } catch (const Rejected& r) {
    failed.status = MeasureStatus::Rejected;
    failed.reason = r.reason();
    failed.detail = r.what();
  } catch (const std::exception& e) {
    failed.status = MeasureStatus::Failed;
    failed.detail = e.what();
  }
  return failed;
}

std::vector<WidthMeasurement> measure_batch(const ImageSource& source, const PipelineConfig& config,
                                            const RunOptions& options, bool keep_columns) {
  std::vector<WidthMeasurement> results(source.size());
  parallel_for(source.size(), config.workers, [&](std::size_t i) {
    const auto& entry = source.entries()[i];
    try {
      const ImageData data = source.load(i);
      results[i] = measure_image(entry, data, config, options);
    } catch (const std::exception& e) {
      results[i] = WidthMeasurement{};
      results[i].image_id = entry.image_id;
      results[i].status = MeasureStatus::Failed;
      results[i].detail = e.what();
    }
    if (!keep_columns) {
      results[i].column_samples.clear();
      results[i].column_samples.shrink_to_fit();
    }
  });
  return results;
}

}  // namespace sidewidth
