#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sidewidth/mask.hpp"
#include "sidewidth/tensor_io.hpp"

namespace sidewidth {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

struct GeoTag {
  double lat = 0.0;
  double lon = 0.0;
  double heading_deg = 0.0;
};

/// One image of a batch. Optional fields fall back to configuration defaults when absent.
struct ImageManifestEntry {
  std::string image_id;
  std::filesystem::path point_map_path;
  std::filesystem::path mask_path;
  std::optional<double> camera_height_m;
  std::optional<double> fov_deg;
  std::optional<Intrinsics> intrinsics;
  std::optional<Eigen::Vector3d> camera_centre;
  std::optional<GeoTag> geo;
  std::optional<std::string> segment_id;
  std::optional<double> reference_width_m;
};

/// Parses a manifest; relative paths are resolved against the manifest's directory.
std::vector<ImageManifestEntry> load_manifest(const std::filesystem::path& path);

/// Writes a manifest; paths below the manifest's directory are stored relative to it.
void save_manifest(const std::filesystem::path& path, const std::vector<ImageManifestEntry>& entries);

/// Geometry and mask of one manifest entry, dimension-checked against each other.
struct ImageData {
  Geometry geometry;
  SemanticMask mask;
};

ImageData load_image(const ImageManifestEntry& entry, const ClassMap& class_map = ClassMap::cityscapes());

}  // namespace sidewidth
