#pragma once

#include <Eigen/Core>

#include "sidewidth/manifest.hpp"
#include "sidewidth/planefit.hpp"
#include "sidewidth/tensor_io.hpp"

namespace sidewidth {

/// Pinhole camera in the image frame convention x right, y down, z forward.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Eigen::Vector3d centre = Eigen::Vector3d::Zero();  // model units

  void validate() const;
};

/// Metric scale recovered from the known camera mounting height.
struct ScaleCalibration {
  double h_cam = 0.0;   // metres
  double h_pred = 0.0;  // model units
  double scale = 0.0;   // metres per model unit
};

/// |n . c + d|. Throws Rejected(CameraOnPlane) below 1e-6 model units.
double predicted_camera_height(const GroundPlane& plane, const Eigen::Vector3d& centre);

/// scale = h_cam / h_pred. Throws Error unless both are positive and finite.
ScaleCalibration scale_factor(double h_cam, double h_pred);

/// Geometry used at its native scale: scale is exactly 1.
ScaleCalibration native_scale(double h_pred);

/// Square pixels, fx = width / (2 tan(fov/2)), principal point at the pixel-centre image centre.
CameraModel intrinsics_from_fov(double fov_deg, int width, int height);

CameraModel camera_from_intrinsics(const Intrinsics& k, int width, int height,
                                   const Eigen::Vector3d& centre = Eigen::Vector3d::Zero());

/// Pixel (u, v) with depth z -> ((u - cx) z / fx, (v - cy) z / fy, z) + centre. Invalid depth -> invalid point.
PointMap unproject_depth(const DepthMap& depth, const CameraModel& cam);

/// Pixel coordinates of a camera-frame point.
Eigen::Vector2d project_point(const Eigen::Vector3d& point, const CameraModel& cam);

/// Depth (z relative to the camera centre) of every point; invalid points give NaN.
DepthMap depth_from_points(const PointMap& points, const CameraModel& cam);

/// Classical single-view geometry: a level camera at `h_cam` above flat ground. Every pixel below the
/// principal row is intersected with the ground (y = h_cam); pixels at or above it are invalid.
PointMap flat_ground_point_map(const CameraModel& cam, double h_cam);

}  // namespace sidewidth
