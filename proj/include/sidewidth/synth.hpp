#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sidewidth/calibrate.hpp"
#include "sidewidth/mask.hpp"
#include "sidewidth/pipeline.hpp"
#include "sidewidth/planefit.hpp"
#include "sidewidth/tensor_io.hpp"

namespace sidewidth {

/// Image-space rectangle [u0, u1) x [v0, v1).
struct ImageRect {
  int u0 = 0;
  int v0 = 0;
  int u1 = 0;
  int v1 = 0;
};

/// Flat street scene: the camera stands over a road; a curb runs parallel to the direction of travel at
/// `road_width_m` to the camera's side, followed by a sidewalk strip and then "other" ground.
struct SceneSpec {
  double sidewalk_width_m = 2.0;
  double camera_height_m = 2.5;
  double camera_pitch_deg = -5.0;  // negative looks down
  double camera_yaw_deg = 0.0;     // 0 looks straight across the street
  double road_width_m = 4.0;       // lateral distance from the camera to the curb
  double global_scale = 1.0;       // multiplier applied to emitted coordinates
  double noise_sigma_frac = 0.0;   // radial noise, fraction of range
  std::vector<ImageRect> occlusion_boxes;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneTruth {
  GroundPlane plane;  // camera frame, model units, normal towards the camera
  double sidewalk_width_m = 0.0;
  double camera_height_m = 0.0;
  double camera_height_model = 0.0;
  double global_scale = 1.0;
  double road_width_m = 0.0;
  Eigen::Vector3d across = Eigen::Vector3d::Zero();  // camera frame unit vector pointing away from the road
  Eigen::Vector3d along = Eigen::Vector3d::Zero();
};

struct Scene {
  PointMap points;
  SemanticMask mask;
  SceneTruth truth;
};

/// Ray-casts every pixel against the ground. Sky pixels get non-finite points and class Other.
/// Throws Error when no ground or no sidewalk is visible.
Scene generate_scene(const SceneSpec& spec, const CameraModel& cam);

/// Lateral (across-street) world coordinate of an emitted point, in metres from the camera foot.
double lateral_offset_m(const Eigen::Vector3d& emitted_point, const SceneTruth& truth);

struct BenchmarkSpec {
  std::size_t n_scenes = 100;
  double width_min_m = 0.56;
  double width_max_m = 3.94;
  std::uint64_t seed = 0;
  double camera_height_m = 2.5;
  double pitch_min_deg = -15.0;
  double pitch_max_deg = 0.0;
  double yaw_min_deg = -20.0;
  double yaw_max_deg = 20.0;
  double road_min_m = 3.0;
  double road_max_m = 5.0;
  double noise_sigma_frac = 0.0;
  double global_scale_min = 1.0;
  double global_scale_max = 1.0;
  int image_width = 640;
  int image_height = 640;
  double fov_deg = 90.0;
  bool emit_depth = false;  // also write (H, W, 1) depth tensors and a depth manifest

  void validate() const;
  CameraModel camera() const;
};

/// Scene parameters for one benchmark index; depends only on (spec, index).
SceneSpec benchmark_scene_spec(const BenchmarkSpec& spec, std::size_t index);
std::string benchmark_image_id(std::size_t index);
ImageManifestEntry benchmark_entry(const BenchmarkSpec& spec, std::size_t index);

enum class GeometryKind { PointMap, Depth };

/// Benchmark scenes generated on demand, without touching the disk.
class SyntheticSource : public ImageSource {
 public:
  explicit SyntheticSource(BenchmarkSpec spec, GeometryKind kind = GeometryKind::PointMap);

  const std::vector<ImageManifestEntry>& entries() const override { return entries_; }
  ImageData load(std::size_t index) const override;
  Scene scene(std::size_t index) const;
  const BenchmarkSpec& spec() const noexcept { return spec_; }

 private:
  BenchmarkSpec spec_;
  GeometryKind kind_;
  std::vector<ImageManifestEntry> entries_;
};

/// Writes `<id>.npy`, `<id>_mask.png`, `<id>_truth.json` per scene and `manifest.json` (plus
/// `<id>_depth.npy` and `manifest_depth.json` when emit_depth). Returns the point-map manifest entries.
std::vector<ImageManifestEntry> generate_benchmark(const BenchmarkSpec& spec, const std::filesystem::path& out_dir,
                                                   unsigned workers = 1);

}  // namespace sidewidth
