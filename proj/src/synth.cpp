#include "sidewidth/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <json.hpp>

#include "sidewidth/error.hpp"
#include "sidewidth/parallel.hpp"
#include "sidewidth/stats.hpp"

namespace sidewidth {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct CameraPose {
  Eigen::Vector3d right;
  Eigen::Vector3d down;
  Eigen::Vector3d forward;
};

// World frame: y up, the curb runs along x, lateral distance from the camera foot grows along +z.
CameraPose pose(double pitch_deg, double yaw_deg) {
  const double p = pitch_deg * kDeg;
  const double y = yaw_deg * kDeg;
  CameraPose c;
  c.forward = Eigen::Vector3d(std::sin(y) * std::cos(p), std::sin(p), std::cos(y) * std::cos(p));
  c.right = c.forward.cross(Eigen::Vector3d::UnitY()).normalized();
  c.down = c.forward.cross(c.right);
  return c;
}

}  // namespace

void SceneSpec::validate() const {
  if (!(sidewalk_width_m > 0.0)) throw Error("scene: sidewalk_width_m must be positive");
  if (!(camera_height_m > 0.0)) throw Error("scene: camera_height_m must be positive");
  if (!(road_width_m > 0.0)) throw Error("scene: road_width_m must be positive");
  if (!(global_scale > 0.0)) throw Error("scene: global_scale must be positive");
  if (!(noise_sigma_frac >= 0.0)) throw Error("scene: noise_sigma_frac must be non-negative");
  if (!(std::abs(camera_pitch_deg) < 90.0)) throw Error("scene: |camera_pitch_deg| must be < 90");
}

Scene generate_scene(const SceneSpec& spec, const CameraModel& cam) {
  spec.validate();
  cam.validate();
  const CameraPose pz = pose(spec.camera_pitch_deg, spec.camera_yaw_deg);
  const double h = spec.camera_height_m;
  const double curb = spec.road_width_m;
  const double outer = spec.road_width_m + spec.sidewalk_width_m;
  const double k = spec.global_scale;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const auto w = static_cast<std::size_t>(cam.width);
  constexpr float nan = std::numeric_limits<float>::quiet_NaN();
  std::vector<float> xyz(w * cam.height * 3, nan);
  std::vector<SemanticClass> classes(w * cam.height, SemanticClass::Other);
  std::size_t ground = 0;
  std::size_t sidewalk = 0;

  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const Eigen::Vector3d ray((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      const Eigen::Vector3d dir = pz.right * ray.x() + pz.down * ray.y() + pz.forward * ray.z();
      if (!(dir.y() < 0.0)) continue;
      const double t = h / -dir.y();
      const double lateral = t * dir.z();
      const std::size_t idx = static_cast<std::size_t>(v) * w + u;
      if (lateral < curb) {
        classes[idx] = SemanticClass::Road;
      } else if (lateral < outer) {
        classes[idx] = SemanticClass::Sidewalk;
        ++sidewalk;
      }
      ++ground;
      double factor = k;
      if (spec.noise_sigma_frac > 0.0) factor *= 1.0 + spec.noise_sigma_frac * gauss(rng);
      const Eigen::Vector3d p = (t * factor) * ray + cam.centre;
      xyz[3 * idx] = static_cast<float>(p.x());
      xyz[3 * idx + 1] = static_cast<float>(p.y());
      xyz[3 * idx + 2] = static_cast<float>(p.z());
    }
  }
  if (ground == 0) throw Error("scene: no ground pixels in view");
  if (sidewalk == 0) throw Error("scene: sidewalk not in view");

  for (const auto& box : spec.occlusion_boxes) {
    for (int v = std::max(0, box.v0); v < std::min(cam.height, box.v1); ++v) {
      for (int u = std::max(0, box.u0); u < std::min(cam.width, box.u1); ++u) {
        classes[static_cast<std::size_t>(v) * w + u] = SemanticClass::Other;
      }
    }
  }

  Scene scene{PointMap(cam.width, cam.height, std::move(xyz)), SemanticMask(cam.width, cam.height, std::move(classes)),
              {}};
  SceneTruth& truth = scene.truth;
  // World axes expressed in the camera frame (rows of the camera-to-world rotation).
  const Eigen::Vector3d up_c(pz.right.y(), pz.down.y(), pz.forward.y());
  truth.across = Eigen::Vector3d(pz.right.z(), pz.down.z(), pz.forward.z());
  truth.along = Eigen::Vector3d(pz.right.x(), pz.down.x(), pz.forward.x());
  truth.plane.normal = up_c;
  truth.plane.offset = k * h - up_c.dot(cam.centre);
  truth.plane.inlier_count = ground;
  truth.plane.inlier_ratio = 1.0;
  truth.sidewalk_width_m = spec.sidewalk_width_m;
  truth.camera_height_m = h;
  truth.camera_height_model = k * h;
  truth.global_scale = k;
  truth.road_width_m = spec.road_width_m;
  return scene;
}

double lateral_offset_m(const Eigen::Vector3d& emitted_point, const SceneTruth& truth) {
  return emitted_point.dot(truth.across) / truth.global_scale;
}

void BenchmarkSpec::validate() const {
  if (n_scenes < 1) throw Error("benchmark: n_scenes must be >= 1");
  if (!(width_min_m > 0.0 && width_min_m <= width_max_m)) throw Error("benchmark: invalid width range");
  if (!(global_scale_min > 0.0 && global_scale_min <= global_scale_max)) throw Error("benchmark: invalid scale range");
  if (!(road_min_m > 0.0 && road_min_m <= road_max_m)) throw Error("benchmark: invalid road width range");
  if (!(pitch_min_deg <= pitch_max_deg) || !(yaw_min_deg <= yaw_max_deg)) throw Error("benchmark: invalid angle range");
  if (!(noise_sigma_frac >= 0.0)) throw Error("benchmark: noise must be non-negative");
  if (!(camera_height_m > 0.0)) throw Error("benchmark: camera height must be positive");
  if (image_width <= 0 || image_height <= 0) throw Error("benchmark: image size must be positive");
}

CameraModel BenchmarkSpec::camera() const { return intrinsics_from_fov(fov_deg, image_width, image_height); }

SceneSpec benchmark_scene_spec(const BenchmarkSpec& spec, std::size_t index) {
  std::mt19937_64 rng(derive_seed(spec.seed, "scene/" + std::to_string(index)));
  auto uniform = [&rng](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SceneSpec s;
  s.sidewalk_width_m = uniform(spec.width_min_m, spec.width_max_m);
  s.camera_pitch_deg = uniform(spec.pitch_min_deg, spec.pitch_max_deg);
  s.camera_yaw_deg = uniform(spec.yaw_min_deg, spec.yaw_max_deg);
  s.road_width_m = uniform(spec.road_min_m, spec.road_max_m);
  s.global_scale = uniform(spec.global_scale_min, spec.global_scale_max);
  s.camera_height_m = spec.camera_height_m;
  s.noise_sigma_frac = spec.noise_sigma_frac;
  s.seed = rng();
  return s;
}

std::string benchmark_image_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04zu", index);
  return buf;
}

ImageManifestEntry benchmark_entry(const BenchmarkSpec& spec, std::size_t index) {
  ImageManifestEntry e;
  e.image_id = benchmark_image_id(index);
  e.point_map_path = e.image_id + ".npy";
  e.mask_path = e.image_id + "_mask.png";
  e.fov_deg = spec.fov_deg;
  e.reference_width_m = benchmark_scene_spec(spec, index).sidewalk_width_m;
  return e;
}

SyntheticSource::SyntheticSource(BenchmarkSpec spec, GeometryKind kind) : spec_(std::move(spec)), kind_(kind) {
  spec_.validate();
  for (std::size_t i = 0; i < spec_.n_scenes; ++i) entries_.push_back(benchmark_entry(spec_, i));
}

Scene SyntheticSource::scene(std::size_t index) const {
  return generate_scene(benchmark_scene_spec(spec_, index), spec_.camera());
}

ImageData SyntheticSource::load(std::size_t index) const {
  Scene s = scene(index);
  if (kind_ == GeometryKind::Depth) return {depth_from_points(s.points, spec_.camera()), std::move(s.mask)};
  return {std::move(s.points), std::move(s.mask)};
}

std::vector<ImageManifestEntry> generate_benchmark(const BenchmarkSpec& spec, const std::filesystem::path& out_dir,
                                                   unsigned workers) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  const CameraModel cam = spec.camera();
  std::vector<ImageManifestEntry> entries(spec.n_scenes);
  std::vector<ImageManifestEntry> depth_entries(spec.n_scenes);

  parallel_for(spec.n_scenes, workers, [&](std::size_t i) {
    const SceneSpec scene_spec = benchmark_scene_spec(spec, i);
    const Scene scene = generate_scene(scene_spec, cam);
    ImageManifestEntry e = benchmark_entry(spec, i);
    e.point_map_path = out_dir / e.point_map_path;
    e.mask_path = out_dir / e.mask_path;
    save_point_map(e.point_map_path, scene.points);
    save_mask(e.mask_path, scene.mask);
    if (spec.emit_depth) {
      ImageManifestEntry d = e;
      d.point_map_path = out_dir / (e.image_id + "_depth.npy");
      save_depth_map(d.point_map_path, depth_from_points(scene.points, cam));
      depth_entries[i] = std::move(d);
    }

    const SceneTruth& t = scene.truth;
    nlohmann::json truth = {
        {"image_id", e.image_id},
        {"sidewalk_width_m", t.sidewalk_width_m},
        {"camera_height_m", t.camera_height_m},
        {"camera_height_model", t.camera_height_model},
        {"global_scale", t.global_scale},
        {"road_width_m", t.road_width_m},
        {"camera_pitch_deg", scene_spec.camera_pitch_deg},
        {"camera_yaw_deg", scene_spec.camera_yaw_deg},
        {"noise_sigma_frac", scene_spec.noise_sigma_frac},
        {"plane", {{"normal", {t.plane.normal.x(), t.plane.normal.y(), t.plane.normal.z()}}, {"offset", t.plane.offset}}},
    };
    std::ofstream out(out_dir / (e.image_id + "_truth.json"), std::ios::trunc);
    out << truth.dump(2) << '\n';
    if (!out) throw FormatError((out_dir / (e.image_id + "_truth.json")).string(), "write failed");
    entries[i] = std::move(e);
  });

  save_manifest(out_dir / "manifest.json", entries);
  if (spec.emit_depth) save_manifest(out_dir / "manifest_depth.json", depth_entries);
  return entries;
}

}  // namespace sidewidth
