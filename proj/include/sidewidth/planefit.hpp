#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sidewidth {

/// Plane n . x + d = 0 with unit normal n, plus diagnostics of the robust fit that produced it.
struct GroundPlane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitY();
  double offset = 0.0;
  std::size_t inlier_count = 0;
  double inlier_ratio = 0.0;
  double threshold_used = 0.0;

  double signed_distance(const Eigen::Vector3d& x) const noexcept { return normal.dot(x) + offset; }
};

struct RansacConfig {
  int iterations = 500;
  std::uint64_t seed = 0;
  double mad_multiplier = 2.5;
  double mad_consistency = 1.4826;
  double clip_lo = 0.005;  // model units
  double clip_hi = 0.05;   // model units
  std::size_t min_support_points = 50;
  double min_inlier_ratio = 0.3;

  /// Throws Error when a field violates its constraint.
  void validate() const;
};

/// Least-squares plane through the centroid; normal is the direction of least variance, oriented so
/// that `reference` lies on the non-negative side. Throws on < 3 points or a rank-deficient set.
GroundPlane fit_plane_svd(std::span<const Eigen::Vector3d> points,
                          const Eigen::Vector3d& reference = Eigen::Vector3d::Zero());

/// |n . x + d| for every point.
std::vector<double> point_plane_distances(std::span<const Eigen::Vector3d> points, const GroundPlane& plane);

/// clip(mad_multiplier * mad_consistency * mad_value, clip_lo, clip_hi).
double adaptive_threshold(double mad_value, const RansacConfig& config);

struct RansacResult {
  GroundPlane plane;  // candidate from the winning minimal sample (not refitted)
  std::vector<std::size_t> inliers;
  double inlier_rms = 0.0;
  int trial = -1;
};

/// Seeded RANSAC over 3-point samples. Maximises the inlier count (distance <= tau); ties go to the lower
/// inlier RMS, then to the earlier trial. Degenerate samples are redrawn, up to 10x `iterations` draws.
RansacResult ransac_plane(std::span<const Eigen::Vector3d> points, double tau, const RansacConfig& config);

struct GroundPlaneFit {
  GroundPlane plane;
  std::vector<std::size_t> inliers;
};

/// Coarse SVD fit -> MAD of absolute distances -> adaptive threshold -> RANSAC -> SVD refit on inliers.
/// Throws Rejected when support or inlier ratio fall below the configured minimum.
GroundPlaneFit fit_ground_plane_with_inliers(std::span<const Eigen::Vector3d> points, const RansacConfig& config,
                                             const Eigen::Vector3d& reference_centre = Eigen::Vector3d::Zero());

inline GroundPlane fit_ground_plane(std::span<const Eigen::Vector3d> points, const RansacConfig& config,
                                    const Eigen::Vector3d& reference_centre = Eigen::Vector3d::Zero()) {
  return fit_ground_plane_with_inliers(points, config, reference_centre).plane;
}

}  // namespace sidewidth
