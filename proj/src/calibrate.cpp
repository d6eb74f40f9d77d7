#include "sidewidth/calibrate.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sidewidth/error.hpp"

namespace sidewidth {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw Error("camera: fx and fy must be positive");
  if (width <= 0 || height <= 0) throw Error("camera: image dimensions must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
    throw Error("camera: principal point must lie inside the image");
}

double predicted_camera_height(const GroundPlane& plane, const Eigen::Vector3d& centre) {
  const double h = std::abs(plane.normal.dot(centre) + plane.offset);
  if (!(h >= 1e-6)) throw Rejected(RejectReason::CameraOnPlane, "camera on ground plane (h_pred = " + std::to_string(h) + ")");
  return h;
}

ScaleCalibration scale_factor(double h_cam, double h_pred) {
  if (!(h_cam > 0.0) || !std::isfinite(h_cam)) throw Error("scale_factor: h_cam must be positive");
  if (!(h_pred > 0.0) || !std::isfinite(h_pred)) throw Error("scale_factor: h_pred must be positive");
  return {h_cam, h_pred, h_cam / h_pred};
}

ScaleCalibration native_scale(double h_pred) { return scale_factor(h_pred, h_pred); }

CameraModel intrinsics_from_fov(double fov_deg, int width, int height) {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error("fov_deg must be in (0, 180), got " + std::to_string(fov_deg));
  if (width <= 0 || height <= 0) throw Error("image dimensions must be positive");
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.fx = width / (2.0 * std::tan(fov_deg * std::numbers::pi / 360.0));
  cam.fy = cam.fx;
  cam.cx = (width - 1) / 2.0;
  cam.cy = (height - 1) / 2.0;
  return cam;
}

CameraModel camera_from_intrinsics(const Intrinsics& k, int width, int height, const Eigen::Vector3d& centre) {
  CameraModel cam{k.fx, k.fy, k.cx, k.cy, width, height, centre};
  cam.validate();
  return cam;
}

PointMap unproject_depth(const DepthMap& depth, const CameraModel& cam) {
  cam.validate();
  if (depth.width() != cam.width || depth.height() != cam.height)
    throw Error("unproject_depth: dimension mismatch between depth map and camera");
  constexpr float nan = std::numeric_limits<float>::quiet_NaN();
  std::vector<float> xyz(static_cast<std::size_t>(cam.width) * cam.height * 3, nan);
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const double z = depth.at(u, v);
      float* p = &xyz[(static_cast<std::size_t>(v) * cam.width + u) * 3];
      p[0] = static_cast<float>((u - cam.cx) * z / cam.fx + cam.centre.x());
      p[1] = static_cast<float>((v - cam.cy) * z / cam.fy + cam.centre.y());
      p[2] = static_cast<float>(z + cam.centre.z());
    }
  }
  return PointMap(cam.width, cam.height, std::move(xyz));
}

Eigen::Vector2d project_point(const Eigen::Vector3d& point, const CameraModel& cam) {
  const Eigen::Vector3d q = point - cam.centre;
  return {cam.fx * q.x() / q.z() + cam.cx, cam.fy * q.y() / q.z() + cam.cy};
}

DepthMap depth_from_points(const PointMap& points, const CameraModel& cam) {
  if (points.width() != cam.width || points.height() != cam.height)
    throw Error("depth_from_points: dimension mismatch between point map and camera");
  std::vector<float> depth(points.pixel_count(), std::numeric_limits<float>::quiet_NaN());
  for (int v = 0; v < points.height(); ++v) {
    for (int u = 0; u < points.width(); ++u) {
      if (points.valid(u, v))
        depth[static_cast<std::size_t>(v) * points.width() + u] =
            static_cast<float>(points.point(u, v).z() - cam.centre.z());
    }
  }
  return DepthMap(points.width(), points.height(), std::move(depth));
}

PointMap flat_ground_point_map(const CameraModel& cam, double h_cam) {
  cam.validate();
  if (!(h_cam > 0.0)) throw Error("flat_ground_point_map: h_cam must be positive");
  std::vector<float> depth(static_cast<std::size_t>(cam.width) * cam.height,
                           std::numeric_limits<float>::quiet_NaN());
  for (int v = 0; v < cam.height; ++v) {
    const double dy = (v - cam.cy) / cam.fy;
    if (!(dy > 0.0)) continue;
    const float z = static_cast<float>(h_cam / dy);
    std::fill_n(depth.begin() + static_cast<std::ptrdiff_t>(v) * cam.width, cam.width, z);
  }
  return unproject_depth(DepthMap(cam.width, cam.height, std::move(depth)), cam);
}

}  // namespace sidewidth
